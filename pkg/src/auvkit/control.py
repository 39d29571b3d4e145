"""Cascaded depth/yaw/speed/roll control with conventional PD or sliding-mode
inner loops.

Architecture: reference low-pass filters feed an outer depth loop (commands
pitch) and an outer lateral loop (commands a heading correction around the
current track heading); inner pitch/yaw loops command stern/rudder
deflections; a roll loop commands a differential fin deflection which the
allocator splits between stern and rudder pairs.  Speed control is a PD law
around a feed-forward trim rpm.

Mode "smc" swaps the two inner PD loops for sliding-mode laws
s = gamma1*edot + gamma2*e, fin = -gamma3*sat(s/boundary_layer); everything
else is unchanged.

Derivative terms act on measured rates (no set-point kick); rates that are
not model states (reference outputs of the outer loops) come from filtered
differentiation with a time constant of at least two samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import ConfigError, DomainError
from .kinematics import wrap_angle
from .state import ActuatorCommand


def clamp(value, lo, hi):
    return min(max(value, lo), hi)


@dataclass(frozen=True)
class PdGains:
    """Proportional-derivative gains with output saturation."""

    kp: float
    kd: float = 0.0
    tau_d: float = 0.05        # s, derivative low-pass time constant
    out_min: float = -math.inf
    out_max: float = math.inf

    def __post_init__(self):
        if self.kp < 0 or self.kd < 0:
            raise ConfigError("PD gains must be non-negative")
        if not self.out_min < self.out_max:
            raise ConfigError("saturation bounds must satisfy min < max")


@dataclass(frozen=True)
class SmcParams:
    """Sliding surface s = gamma1*edot + gamma2*e, switching gain gamma3,
    boundary-layer width for the saturation function."""

    gamma1: float
    gamma2: float
    gamma3: float
    boundary_layer: float

    def __post_init__(self):
        if self.gamma1 <= 0 or self.gamma3 <= 0:
            raise ConfigError("gamma1 and gamma3 must be positive")
        if self.gamma2 < 0:
            raise ConfigError("gamma2 must be non-negative")
        if self.boundary_layer <= 0:
            raise ConfigError("boundary layer width must be positive")


class ReferenceFilter:
    """First-order low-pass with exact one-step discretization."""

    def __init__(self, tau, initial=0.0):
        if tau <= 0:
            raise ConfigError("filter time constant must be positive")
        self.tau = tau
        self.state = float(initial)

    def reset(self, value=0.0):
        self.state = float(value)

    def step(self, target, dt):
        if dt <= 0:
            raise DomainError("dt must be positive")
        a = math.exp(-dt / self.tau)
        self.state = target + (self.state - target) * a
        return self.state

    @property
    def rate(self):
        """Continuous-time rate is (target - state)/tau; callers that need it
        should track it via rate_toward()."""
        raise AttributeError("use rate_toward(target)")

    def rate_toward(self, target):
        return (target - self.state) / self.tau


class RateEstimator:
    """Filtered finite difference d/dt with first-order smoothing."""

    def __init__(self, tau):
        self.tau = tau
        self.prev = None
        self.value = 0.0

    def reset(self):
        self.prev = None
        self.value = 0.0

    def step(self, sample, dt):
        if self.prev is None:
            self.prev = sample
            self.value = 0.0
            return 0.0
        raw = (sample - self.prev) / dt
        self.prev = sample
        alpha = dt / max(self.tau, 2.0 * dt)
        self.value += alpha * (raw - self.value)
        return self.value


# control laws ----------------------------------------------------------------


def depth_outer(e_z, e_z_rate, gains: PdGains):
    """Desired pitch from depth error: theta_ref = -(kp*e + kd*edot), saturated."""
    return clamp(-(gains.kp * e_z + gains.kd * e_z_rate), gains.out_min, gains.out_max)


def pitch_inner(e_theta, e_theta_rate, gains: PdGains):
    """Stern command from pitch error: delta_s = -(kp*e + kd*edot), saturated."""
    return clamp(-(gains.kp * e_theta + gains.kd * e_theta_rate),
                 gains.out_min, gains.out_max)


def yaw_outer(e_y, e_y_rate, gains: PdGains):
    """Heading correction from cross-track error (positive error -> steer to
    positive y, i.e. positive yaw)."""
    return clamp(gains.kp * e_y + gains.kd * e_y_rate, gains.out_min, gains.out_max)


def yaw_inner(e_psi, e_psi_rate, gains: PdGains):
    """Rudder command from (wrapped) yaw error: delta_r = -(kp*e + kd*edot)."""
    e_psi = wrap_angle(e_psi)
    return clamp(-(gains.kp * e_psi + gains.kd * e_psi_rate),
                 gains.out_min, gains.out_max)


def speed_control(e_u, e_u_rate, gains: PdGains, n_feedforward, n_max):
    """Shaft speed command (rev/s) = PD on speed error + trim feed-forward."""
    n = gains.kp * e_u + gains.kd * e_u_rate + n_feedforward
    return clamp(n, 0.0, n_max)


def roll_control(e_phi, e_phi_rate, gains: PdGains):
    """Differential fin command delta_a = -(kp*e_phi + kd*e_phi_rate).

    Same error-derivative convention as the other loops (for a constant
    roll reference e_phi_rate = -phi_rate); a literal rate term on phi
    would anti-damp the roll pendulum for either sign of K_roll.
    """
    return clamp(-(gains.kp * e_phi + gains.kd * e_phi_rate),
                 gains.out_min, gains.out_max)


def smc_inner(e, e_rate, params: SmcParams):
    """Sliding-mode switching output gamma3 * sat(s / boundary_layer).

    Inside the boundary layer the law is linear in s; outside it saturates
    at +/- gamma3 with the sign of s.  The cascade wires the output to the
    fins with a leading minus, like the PD inner laws.
    """
    s = params.gamma1 * e_rate + params.gamma2 * e
    return params.gamma3 * clamp(s / params.boundary_layer, -1.0, 1.0)


def allocate_roll(delta_s, delta_r, delta_a, kappa, fin_max=math.inf):
    """Split collective stern/rudder commands and differential roll duty.

    Pre-saturation the pair sums are exactly 2*delta_s and 2*delta_r for
    any split factor kappa in [0, 1]; each fin is then clipped.
    """
    if not 0.0 <= kappa <= 1.0:
        raise DomainError("kappa must be in [0, 1]")
    hs = kappa * delta_a / 2.0
    hr = (1.0 - kappa) * delta_a / 2.0
    c = lambda v: clamp(v, -fin_max, fin_max)
    return c(delta_s + hs), c(delta_s - hs), c(delta_r + hr), c(delta_r - hr)


def reference_filter_step(target, dt, filt: ReferenceFilter):
    """Advance a first-order reference filter one step; returns the state."""
    return filt.step(target, dt)


# cascaded controller -----------------------------------------------------------


@dataclass(frozen=True)
class ControlConfig:
    """Gain set for the full cascade (defaults tuned against the 4-knot
    linear models; every value is overridable from the scenario file).

    The lateral outer loop is tuned per mode: the sliding-mode inner loop
    is stiff enough to support a fast outer loop, while the conventional
    cascade keeps the conservative outer bandwidth its PD inner loop
    allows.  ``for_mode`` applies these presets.
    """

    mode: str = "conventional"            # or "smc"
    depth: PdGains = field(default_factory=lambda: PdGains(
        kp=0.15, kd=0.35, out_min=-0.35, out_max=0.35))
    pitch: PdGains = field(default_factory=lambda: PdGains(
        kp=2.5, kd=1.0, out_min=-0.35, out_max=0.35))
    lateral: PdGains = field(default_factory=lambda: PdGains(
        kp=0.013, kd=0.12, out_min=-0.9, out_max=0.9))
    yaw: PdGains = field(default_factory=lambda: PdGains(
        kp=2.5, kd=1.0, out_min=-0.35, out_max=0.35))
    speed: PdGains = field(default_factory=lambda: PdGains(
        kp=30.0, kd=0.0))                  # rev/s per m/s
    roll: PdGains = field(default_factory=lambda: PdGains(
        kp=30.0, kd=2.0, out_min=-0.5, out_max=0.5))
    smc_pitch: SmcParams = field(default_factory=lambda: SmcParams(
        gamma1=1.0, gamma2=1.0, gamma3=0.30, boundary_layer=0.03))
    smc_yaw: SmcParams = field(default_factory=lambda: SmcParams(
        gamma1=1.0, gamma2=1.0, gamma3=0.30, boundary_layer=0.03))
    kappa: float = 0.5                     # stern share of the roll duty
    ref_tau: float = 8.0                   # s, reference low-pass (z and u)
    ref_tau_y: float = 0.3                 # s, lateral reference low-pass
    rate_tau: float = 0.05                 # s, filtered differentiation
    turn_radius: float = 6.0               # m commanded turn radius
    psi_ref_rate: float = 0.5              # rad/s heading-reference slew cap
    psi_ref_tau: float = 0.15              # s, heading-reference smoothing

    def __post_init__(self):
        if self.mode not in ("conventional", "smc"):
            raise ConfigError(f"unknown controller mode {self.mode!r}")

    @classmethod
    def for_mode(cls, mode):
        cfg = cls(mode=mode)
        if mode == "smc":
            cfg = replace(cfg, lateral=PdGains(kp=0.30, kd=0.50,
                                               out_min=-0.9, out_max=0.9))
        return cfg


@dataclass
class ControllerOutputs:
    command: ActuatorCommand
    theta_ref: float
    psi_ref: float
    delta_s: float
    delta_r: float
    delta_a: float
    z_ref: float
    y_ref: float
    u_ref: float
    phi_ref: float


class CascadedController:
    """Stateful cascade; one instance per scenario run (single owner)."""

    def __init__(self, cfg: ControlConfig, n_feedforward_rps, fin_max, n_max_rps,
                 u_ref0=0.0, z_ref0=0.0, y_ref0=0.0):
        self.cfg = cfg
        self.n_ff = n_feedforward_rps
        self.fin_max = fin_max
        self.n_max = n_max_rps
        self.f_z = ReferenceFilter(cfg.ref_tau, z_ref0)
        self.f_y = ReferenceFilter(cfg.ref_tau_y, y_ref0)
        self.f_u = ReferenceFilter(cfg.ref_tau, u_ref0)
        self.d_theta_ref = RateEstimator(cfg.rate_tau)
        self.d_u = RateEstimator(cfg.rate_tau)
        self._psi_ref = None     # slewed heading reference state
        self._psi_f = None       # smoothed heading reference state

    def reset(self):
        for f in (self.d_theta_ref, self.d_u):
            f.reset()
        self._psi_ref = None
        self._psi_f = None

    def step(self, state, refs, dt):
        """One control update.

        ``refs`` is a mapping with keys u_ref (m/s), z_ref (m), y_ref (m),
        phi_ref (rad), psi_track (rad, current track heading).  Measured
        rates are taken from the vehicle kinematics.
        """
        from .kinematics import euler_rates

        cfg = self.cfg
        u, v, w, p, q, r = state.nu
        x, y, z, phi, theta, psi = state.eta
        eta_dot = euler_rates(state.eta, state.nu)
        z_rate, y_rate = eta_dot[2], eta_dot[1]
        phi_rate, theta_rate, psi_rate = eta_dot[3], eta_dot[4], eta_dot[5]

        u_ref = self.f_u.step(refs["u_ref"], dt)
        z_ref = self.f_z.step(refs["z_ref"], dt)
        y_ref = self.f_y.step(refs["y_ref"], dt)
        phi_ref = refs.get("phi_ref", 0.0)
        psi_track = refs.get("psi_track", 0.0)

        # outer depth loop -> pitch reference; the derivative term acts on
        # the measured depth rate only (no set-point kick)
        e_z = z_ref - z
        theta_ref = depth_outer(e_z, -z_rate, cfg.depth)

        # outer lateral loop -> heading reference about the track heading.
        # The y response to a heading correction scales with cos(psi_track):
        # it flips sign on reversed legs and vanishes on +/-90 deg
        # cross-overs (where the lateral reference ramps open-loop).
        track_gain = math.cos(psi_track)
        e_y = y_ref - y
        e_y_rate = self.f_y.rate_toward(refs["y_ref"]) - y_rate
        psi_corr = yaw_outer(track_gain * e_y, track_gain * e_y_rate, cfg.lateral)
        psi_raw = wrap_angle(psi_track + psi_corr)
        # slew-limit the heading reference so corners are tracked arcs of
        # the commanded turn radius (speed-scaled) instead of deep rudder
        # saturation
        if self._psi_ref is None:
            self._psi_ref = psi
            self._psi_f = psi
        rate = min(max(u, 0.3) / cfg.turn_radius, cfg.psi_ref_rate)
        step_lim = rate * dt
        self._psi_ref = wrap_angle(
            self._psi_ref + clamp(wrap_angle(psi_raw - self._psi_ref),
                                  -step_lim, step_lim))
        # smooth the slewed reference so its rate is continuous across the
        # arc boundaries (the analytic filter rate feeds the inner loops)
        a = math.exp(-dt / cfg.psi_ref_tau)
        gap = wrap_angle(self._psi_ref - self._psi_f)
        self._psi_f = wrap_angle(self._psi_ref - gap * a)
        psi_ref = self._psi_f
        psi_ref_rate = wrap_angle(self._psi_ref - self._psi_f) / cfg.psi_ref_tau

        # inner loops
        e_theta = theta_ref - theta
        e_theta_rate = self.d_theta_ref.step(theta_ref, dt) - theta_rate
        e_psi = wrap_angle(psi_ref - psi)
        e_psi_rate = psi_ref_rate - psi_rate
        if cfg.mode == "smc":
            delta_s = -smc_inner(e_theta, e_theta_rate, cfg.smc_pitch)
            delta_r = -smc_inner(e_psi, e_psi_rate, cfg.smc_yaw)
        else:
            delta_s = pitch_inner(e_theta, e_theta_rate, cfg.pitch)
            delta_r = yaw_inner(e_psi, e_psi_rate, cfg.yaw)

        # roll and speed
        delta_a = roll_control(phi_ref - phi, -phi_rate, cfg.roll)
        e_u = u_ref - u
        e_u_rate = -self.d_u.step(u, dt)   # derivative on the measurement
        n_cmd = speed_control(e_u, e_u_rate, cfg.speed, self.n_ff, self.n_max)

        s1, s2, r1, r2 = allocate_roll(delta_s, delta_r, delta_a, cfg.kappa,
                                       self.fin_max)
        cmd = ActuatorCommand(n_cmd, s1, s2, r1, r2)
        return ControllerOutputs(cmd, theta_ref, psi_ref, delta_s, delta_r,
                                 delta_a, z_ref, y_ref, u_ref, phi_ref)
