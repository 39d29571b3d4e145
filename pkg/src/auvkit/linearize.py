"""Analytic linear subsystem models and their numeric validation.

Three decoupled models at an operating speed U:

* depth-pitch: states (q, theta, z), input the summed stern deflection
  delta_s = delta_s1 + delta_s2;
* yaw: states (r, psi), input the summed rudder deflection;
* speed: state u, input shaft speed n (rev/s), tangent-linearized about the
  trim rpm.

`full_jacobian` differentiates the complete 12-state nonlinear model.  The
subsystem comparisons use `reduced_jacobian`, which differentiates each
subsystem under its own derivation assumptions (off-axis states frozen at
trim, the subsystem's scalar inertia row).  The raw 12-state sub-blocks are
NOT expected to match the analytic models: the heave/sway mass couplings
(Z_qdot, N_vdot) that the derivations neglect shift the poles by ~40%.

Printed reference constants from the source vehicle study are kept in
PAPER_REFERENCE for comparison reporting; they are not all re-derivable
from the coefficient tables and are never used in the models themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (VehicleModel, coriolis_added, coriolis_rb, damping_matrix,
                       hydrostatic_wrench, actuator_wrench)
from .errors import DomainError
from .params import VehicleParams
from .state import ActuatorCommand, VehicleState


@dataclass(frozen=True)
class StateSpaceModel:
    A: np.ndarray
    B: np.ndarray
    state_labels: tuple
    input_labels: tuple

    def poles(self):
        return np.linalg.eigvals(self.A)


@dataclass(frozen=True)
class TransferFunction:
    """Rational transfer function; coefficient lists in descending powers."""

    num: tuple
    den: tuple

    def __post_init__(self):
        if not self.den or self.den[0] == 0:
            raise DomainError("denominator leading coefficient must be nonzero")
        if len(self.num) > len(self.den):
            raise DomainError("transfer function must be proper")

    def __mul__(self, other):
        return TransferFunction(tuple(np.polymul(self.num, other.num)),
                                tuple(np.polymul(self.den, other.den)))

    def poles(self):
        return np.roots(self.den)

    def dc_gain(self):
        return self.num[-1] / self.den[-1]

    def integrator_order(self):
        """Number of trailing zero denominator coefficients (pure integrators)."""
        n = 0
        for c in reversed(self.den):
            if c == 0.0:
                n += 1
            else:
                break
        return n


def depth_pitch_model(U, params: VehicleParams):
    """State-space depth-pitch subsystem, states (q, theta, z)."""
    if U <= 0:
        raise DomainError("operating speed must be positive")
    rb, hc = params.rb, params.hydro
    mc = rb.Iyy - hc.M_qdot
    M_theta = -rb.cg[2] * rb.W
    M_ds = hc.M_uu_ds * U * U
    M_q = hc.M_uq * U
    A = np.array([
        [(M_q - rb.m * rb.cg[0] * U) / mc, M_theta / mc, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, -U, 0.0],
    ])
    B = np.array([[M_ds / mc], [0.0], [0.0]])
    return StateSpaceModel(A, B, ("q", "theta", "z"), ("delta_s",))


def depth_transfer_functions(U, params: VehicleParams):
    """(G_z full stern-to-depth, G_theta inner, G_z_outer = -U/s)."""
    ss = depth_pitch_model(U, params)
    a00, a01 = ss.A[0, 0], ss.A[0, 1]
    b0 = ss.B[0, 0]
    g_theta = TransferFunction((b0,), (1.0, -a00, -a01))
    g_outer = TransferFunction((-U,), (1.0, 0.0))
    return g_theta * g_outer, g_theta, g_outer


def yaw_model(U, params: VehicleParams):
    """Yaw subsystem: state space (r, psi) plus (G_psi, G_y = (U/s) G_psi)."""
    if U <= 0:
        raise DomainError("operating speed must be positive")
    rb, hc = params.rb, params.hydro
    nc = rb.Izz - hc.N_rdot
    N_r = hc.N_ur * U
    N_dr = hc.N_uu_dr * U * U
    A = np.array([[(N_r - rb.m * rb.cg[0] * U) / nc, 0.0], [1.0, 0.0]])
    B = np.array([[N_dr / nc], [0.0]])
    ss = StateSpaceModel(A, B, ("r", "psi"), ("delta_r",))
    g_psi = TransferFunction((N_dr / nc,), (1.0, -A[0, 0], 0.0))
    g_y = TransferFunction((U,), (1.0, 0.0)) * g_psi
    return ss, g_psi, g_y


def trim_rpm_for_speed(U, params: VehicleParams):
    """Shaft speed (rev/s) whose thrust balances axial drag at speed U."""
    pp, hc = params.prop, params.hydro
    target = -hc.X_uu * U * U / (1.0 - pp.tau_p)
    # invert thrust polynomial a1 n^2 + a2 n + a3 = target on [0, n_max]
    a, b, c = pp.a1, pp.a2, pp.a3 - target
    if a == 0.0:
        if b == 0.0:
            raise DomainError("thrust polynomial cannot reach the drag balance")
        return c / -b
    disc = b * b - 4 * a * c
    if disc < 0:
        raise DomainError("thrust polynomial cannot reach the drag balance")
    return (-b + math.sqrt(disc)) / (2 * a)


def speed_model(U, params: VehicleParams, n_trim_rps=None):
    """Surge-speed transfer function u(s)/n(s), n in rev/s.

    Tangent linearization at the operating point: thrust slope
    (1 - tau_p)(2 a1 n_trim + a2) and drag slope 2 X_uu U, which makes both
    the pole and the DC gain match the nonlinear model for small steps.
    """
    if U <= 0:
        raise DomainError("operating speed must be positive")
    pp, hc, rb = params.prop, params.hydro, params.rb
    if n_trim_rps is None:
        n_trim_rps = trim_rpm_for_speed(U, params)
    thrust_slope = (1.0 - pp.tau_p) * (2.0 * pp.a1 * n_trim_rps + pp.a2)
    X_u = 2.0 * hc.X_uu * U
    return TransferFunction((thrust_slope,), (rb.m - hc.X_udot, -X_u))


# numeric validation ---------------------------------------------------------

STATE_LABELS = ("u", "v", "w", "p", "q", "r", "x", "y", "z", "phi", "theta", "psi")
INPUT_LABELS = ("delta_s", "delta_r", "n")


def _pack(state: VehicleState):
    return np.concatenate([state.nu, state.eta])


def _unpack(x, template: VehicleState):
    s = template.copy()
    s.nu = x[0:6].copy()
    s.eta = x[6:12].copy()
    return s


def full_jacobian(state: VehicleState, cmd: ActuatorCommand,
                  params: VehicleParams, step=1e-6):
    """Central-difference Jacobian of the 12-state dynamics at (state, cmd).

    Returns (A 12x12, B 12x3, warn) where the input columns are the summed
    stern deflection, summed rudder deflection and shaft speed (rev/s), and
    ``warn`` flags a non-trim operating point.
    """
    model = VehicleModel(params)

    def f(x, u_vec):
        ds, dr, n = u_vec
        c = ActuatorCommand(n, ds / 2.0, ds / 2.0, dr / 2.0, dr / 2.0)
        d = model.state_derivative(_unpack(x, state), c)
        return np.concatenate([d.nu, d.eta])

    x0 = _pack(state)
    u0 = np.array([cmd.delta_s1 + cmd.delta_s2, cmd.delta_r1 + cmd.delta_r2,
                   cmd.n_rps])
    f0 = f(x0, u0)
    warn = bool(np.max(np.abs(f0[0:6])) > 1e-6)
    A = np.empty((12, 12))
    for j in range(12):
        h = max(step * abs(x0[j]), step)
        xp, xm = x0.copy(), x0.copy()
        xp[j] += h
        xm[j] -= h
        A[:, j] = (f(xp, u0) - f(xm, u0)) / (2 * h)
    B = np.empty((12, 3))
    for j in range(3):
        h = max(step * abs(u0[j]), step)
        up, um = u0.copy(), u0.copy()
        up[j] += h
        um[j] -= h
        B[:, j] = (f(x0, up) - f(x0, um)) / (2 * h)
    return A, B, warn


def _force_vector(state: VehicleState, cmd: ActuatorCommand, params: VehicleParams):
    """Right-hand-side force vector tau + g - (C + D) nu (no mass solve)."""
    nu = state.nu
    tau = actuator_wrench(cmd, nu[0], params.prop, params.hydro)
    g = hydrostatic_wrench(state.eta[3], state.eta[4], params.rb)
    C = coriolis_rb(nu, params.rb) + coriolis_added(nu, params.hydro)
    D = damping_matrix(nu, params.hydro)
    return tau.as_array() + g.as_array() - (C + D) @ nu


def reduced_jacobian(subsystem, state0: VehicleState, cmd0: ActuatorCommand,
                     params: VehicleParams, step=1e-6):
    """Numeric (A, B) of one subsystem under its derivation assumptions.

    The subsystem states are perturbed with every other state frozen at the
    operating point, and each acceleration is taken from the subsystem's own
    scalar inertia row (the cross-axis mass couplings that the analytic
    derivations drop are excluded here too, so the comparison is
    like-for-like).
    """
    from .kinematics import euler_rates

    rb, hc = params.rb, params.hydro
    if subsystem == "depth":
        labels, input_idx = ("q", "theta", "z"), 0
        inertia = rb.Iyy - hc.M_qdot
        row = 4

        def set_state(vals, s):
            s.nu[4] = vals[0]
            s.eta[4] = vals[1]
            s.eta[2] = vals[2]

        def get_rates(s, c):
            eta_dot = euler_rates(s.eta, s.nu)
            return np.array([_force_vector(s, c, params)[row] / inertia,
                             eta_dot[4], eta_dot[2]])

        x0 = np.array([state0.nu[4], state0.eta[4], state0.eta[2]])
    elif subsystem == "yaw":
        labels, input_idx = ("r", "psi"), 1
        inertia = rb.Izz - hc.N_rdot
        row = 5

        def set_state(vals, s):
            s.nu[5] = vals[0]
            s.eta[5] = vals[1]

        def get_rates(s, c):
            eta_dot = euler_rates(s.eta, s.nu)
            return np.array([_force_vector(s, c, params)[row] / inertia,
                             eta_dot[5]])

        x0 = np.array([state0.nu[5], state0.eta[5]])
    elif subsystem == "speed":
        labels, input_idx = ("u",), 2
        inertia = rb.m - hc.X_udot
        row = 0

        def set_state(vals, s):
            s.nu[0] = vals[0]

        def get_rates(s, c):
            return np.array([_force_vector(s, c, params)[row] / inertia])

        x0 = np.array([state0.nu[0]])
    else:
        raise DomainError(f"unknown subsystem {subsystem!r}")

    u0 = np.array([cmd0.delta_s1 + cmd0.delta_s2,
                   cmd0.delta_r1 + cmd0.delta_r2, cmd0.n_rps])

    def f(xv, uv):
        s = state0.copy()
        set_state(xv, s)
        c = ActuatorCommand(uv[2], uv[0] / 2.0, uv[0] / 2.0, uv[1] / 2.0, uv[1] / 2.0)
        return get_rates(s, c)

    n = len(x0)
    A = np.empty((n, n))
    for j in range(n):
        h = max(step * abs(x0[j]), step)
        xp, xm = x0.copy(), x0.copy()
        xp[j] += h
        xm[j] -= h
        A[:, j] = (f(xp, u0) - f(xm, u0)) / (2 * h)
    h = max(step * abs(u0[input_idx]), step)
    up, um = u0.copy(), u0.copy()
    up[input_idx] += h
    um[input_idx] -= h
    B = ((f(x0, up) - f(x0, um)) / (2 * h)).reshape(n, 1)
    return StateSpaceModel(A, B, labels, (INPUT_LABELS[input_idx],))


def block_agreement(analytic: StateSpaceModel, numeric: StateSpaceModel,
                    rel_tol=0.05, abs_tol=0.02):
    """Entrywise comparison within max(rel_tol relative, abs_tol absolute).

    Returns (ok, worst) where worst is the largest tolerance-normalized
    excess over all A and B entries.
    """
    worst = 0.0
    for Ma, Mn in ((analytic.A, numeric.A), (analytic.B, numeric.B)):
        diff = np.abs(Ma - Mn)
        allow = np.maximum(rel_tol * np.abs(Ma), abs_tol)
        worst = max(worst, float(np.max(diff / allow)))
    return worst <= 1.0, worst


# printed constants from the source study (comparison references only)
PAPER_REFERENCE = {
    "G_z": {"num": 4.154, "den": (1.0, 0.824, 0.6927)},
    "G_psi": {"num": -4.223, "pole": 0.579},
    "G_u": {"num": 0.038, "den": (31.41, 1.6)},
}


@dataclass
class ReferenceComparison:
    """Derived-vs-printed constant comparison for the report path."""

    rows: list = field(default_factory=list)

    def add(self, name, derived, printed):
        rel = abs(derived - printed) / max(abs(printed), 1e-12)
        self.rows.append({"constant": name, "derived": derived,
                          "printed": printed, "rel_diff": rel,
                          "flag": "ok" if rel <= 0.35 else "DISCREPANT"})
        return self

    def lines(self):
        out = ["constant           derived      printed      rel_diff  flag"]
        for r in self.rows:
            out.append(f"{r['constant']:<18} {r['derived']:>11.4f}  "
                       f"{r['printed']:>11.4f}  {r['rel_diff']:>8.1%}  {r['flag']}")
        return out


def compare_with_paper(U, params: VehicleParams):
    """Build the derived-vs-printed comparison table at speed U."""
    gz, gth, _ = depth_transfer_functions(U, params)
    _, gpsi, _ = yaw_model(U, params)
    gu = speed_model(U, params)
    cmp = ReferenceComparison()
    cmp.add("G_z numerator", gz.num[0], PAPER_REFERENCE["G_z"]["num"])
    cmp.add("depth damping", gth.den[1], PAPER_REFERENCE["G_z"]["den"][1])
    cmp.add("depth stiffness", gth.den[2], PAPER_REFERENCE["G_z"]["den"][2])
    cmp.add("G_psi numerator", gpsi.num[0], PAPER_REFERENCE["G_psi"]["num"])
    cmp.add("yaw pole", gpsi.den[1], PAPER_REFERENCE["G_psi"]["pole"])
    cmp.add("speed mass", gu.den[0], PAPER_REFERENCE["G_u"]["den"][0])
    return cmp
