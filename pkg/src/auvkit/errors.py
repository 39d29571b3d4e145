"""Exception types shared across the toolkit."""


class AuvToolError(Exception):
    """Base class for all auvkit errors."""


class ConfigError(AuvToolError):
    """Bad or inconsistent configuration (unknown key, invalid value, singular
    mass matrix, non-positive inertias, ...)."""

    def __init__(self, message, key=None):
        self.key = key
        if key is not None:
            message = f"{key}: {message}"
        super().__init__(message)


class DomainError(AuvToolError, ValueError):
    """Input outside the documented domain of an operation."""


class SingularityError(AuvToolError):
    """Euler-angle kinematics evaluated too close to pitch +/- 90 deg."""


class ConvergenceError(AuvToolError):
    """Iterative solver failed to converge; carries the last residual."""

    def __init__(self, message, residual_norm=None, iterations=None):
        self.residual_norm = residual_norm
        self.iterations = iterations
        super().__init__(message)


class SimulationDivergedError(AuvToolError):
    """Closed-loop simulation left the validity envelope (NaN or runaway
    speed).  Carries the simulation time and the partial log, if any."""

    def __init__(self, message, t=None, partial_log=None):
        self.t = t
        self.partial_log = partial_log
        super().__init__(message)
