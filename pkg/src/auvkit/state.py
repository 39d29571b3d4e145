"""State, command and disturbance containers.

Conventions: body axes x forward / y starboard / z down, NED earth frame
(z positive down), SI units with radians internally.  Propeller speed is
carried in rev/s internally; rpm appears only at file and CLI boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError


def _vec6(values):
    arr = np.asarray(values, dtype=float)
    if arr.shape != (6,):
        raise DomainError(f"expected 6 components, got shape {arr.shape}")
    return arr


@dataclass
class VehicleState:
    """Body velocities nu = [u v w p q r], earth pose eta = [x y z phi theta psi],
    and the propeller shaft pair (n in rev/s, inflow u_p in m/s)."""

    nu: np.ndarray = field(default_factory=lambda: np.zeros(6))
    eta: np.ndarray = field(default_factory=lambda: np.zeros(6))
    n_rps: float = 0.0
    u_p: float = 0.0

    def __post_init__(self):
        self.nu = _vec6(self.nu)
        self.eta = _vec6(self.eta)

    def copy(self):
        return VehicleState(self.nu.copy(), self.eta.copy(), self.n_rps, self.u_p)

    @property
    def speed(self):
        """Total linear speed sqrt(u^2 + v^2 + w^2)."""
        return float(np.sqrt(self.nu[0] ** 2 + self.nu[1] ** 2 + self.nu[2] ** 2))

    def require_finite(self):
        if not (np.isfinite(self.nu).all() and np.isfinite(self.eta).all()
                and np.isfinite(self.n_rps) and np.isfinite(self.u_p)):
            raise DomainError("non-finite vehicle state")


@dataclass(frozen=True)
class ActuatorCommand:
    """Propeller speed (rev/s) and the four fin angles (rad).

    delta_s1/delta_s2 are the stern planes (pitch authority), delta_r1/
    delta_r2 the rudders (yaw authority).  A differential component between
    paired fins carries the roll duty.
    """

    n_rps: float = 0.0
    delta_s1: float = 0.0
    delta_s2: float = 0.0
    delta_r1: float = 0.0
    delta_r2: float = 0.0

    @property
    def delta_roll(self):
        """Differential fin content (delta_s1-delta_s2) + (delta_r1-delta_r2).

        This inverts the roll allocation for any stern/rudder share, so the
        roll torque can be computed from the command alone.
        """
        return (self.delta_s1 - self.delta_s2) + (self.delta_r1 - self.delta_r2)

    def clipped(self, fin_max, n_max_rps):
        c = np.clip
        return ActuatorCommand(
            n_rps=float(c(self.n_rps, 0.0, n_max_rps)),
            delta_s1=float(c(self.delta_s1, -fin_max, fin_max)),
            delta_s2=float(c(self.delta_s2, -fin_max, fin_max)),
            delta_r1=float(c(self.delta_r1, -fin_max, fin_max)),
            delta_r2=float(c(self.delta_r2, -fin_max, fin_max)),
        )

    def require_finite(self):
        vals = (self.n_rps, self.delta_s1, self.delta_s2, self.delta_r1, self.delta_r2)
        if not all(np.isfinite(v) for v in vals):
            raise DomainError("non-finite actuator command")


@dataclass
class OceanCurrent:
    """First-order ocean current: speed U_c with direction fixed relative to
    the vehicle by the attack/side-slip pair (alpha_c, beta_c).

    U_c follows  dU_c/dt + zeta * U_c = mu + noise,  zeta >= 0.
    """

    U_c: float = 0.0          # m/s
    alpha_c: float = 0.0      # rad
    beta_c: float = 0.0       # rad
    zeta: float = 0.0         # 1/s decay rate
    mu: float = 0.0           # m/s^2 constant forcing (steady state mu/zeta)
    noise_sigma: float = 0.0  # std-dev of the white-noise forcing

    def __post_init__(self):
        if self.zeta < 0:
            raise DomainError("current decay rate zeta must be >= 0")
        self.U_c = max(0.0, float(self.U_c))

    def copy(self):
        return replace(self)


@dataclass(frozen=True)
class Wrench:
    """Body-frame force (X, Y, Z) and moment (K, M, N)."""

    X: float = 0.0
    Y: float = 0.0
    Z: float = 0.0
    K: float = 0.0
    M: float = 0.0
    N: float = 0.0

    def as_array(self):
        return np.array([self.X, self.Y, self.Z, self.K, self.M, self.N])

    def __add__(self, other):
        return Wrench(self.X + other.X, self.Y + other.Y, self.Z + other.Z,
                      self.K + other.K, self.M + other.M, self.N + other.N)
