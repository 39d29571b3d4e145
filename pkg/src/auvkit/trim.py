"""Level-flight (trim) solving.

A damped Newton-Raphson drives the full nonlinear state derivative to zero
at a commanded speed.  The decision vector holds the flow angles, attitude,
shaft speed, inflow and the four fin angles; shaft dynamics are treated as
steady (the shaft-speed rate is identically zero for the fitted-polynomial
propeller and the inflow equation supplies the u_p residual), which removes
the propeller load torque as a separate unknown.

Two roll modes:

* ``free``  - fins deflect symmetrically, the trim roll angle balances the
  propeller torque (default; matches the vehicle's natural level flight).
* ``zero``  - roll is forced to zero and a differential fin component picks
  up the torque, split stern/rudder by the allocation factor kappa.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import VehicleModel, propeller_two_state_derivatives, shaft_torque_for
from .errors import ConvergenceError, DomainError
from .params import VehicleParams
from .state import ActuatorCommand, VehicleState


@dataclass(frozen=True)
class TrimDecision:
    """Level-flight decision variables (angles rad, shaft speed rpm)."""

    alpha: float = 0.0      # angle of attack
    beta: float = 0.0       # side-slip
    theta: float = 0.0      # pitch
    phi: float = 0.0        # roll
    n_rpm: float = 1200.0
    u_p: float = 0.0        # propeller inflow, m/s
    delta_s1: float = 0.0
    delta_s2: float = 0.0
    delta_r1: float = 0.0
    delta_r2: float = 0.0

    def command(self):
        return ActuatorCommand(self.n_rpm / 60.0, self.delta_s1, self.delta_s2,
                               self.delta_r1, self.delta_r2)

    def state(self, U, depth=0.0, psi=0.0):
        """Vehicle state flying at total speed U in this trim condition."""
        u = U * math.cos(self.alpha) * math.cos(self.beta)
        v = U * math.sin(self.beta)
        w = U * math.sin(self.alpha) * math.cos(self.beta)
        nu = np.array([u, v, w, 0.0, 0.0, 0.0])
        eta = np.array([0.0, 0.0, depth, self.phi, self.theta, psi])
        return VehicleState(nu=nu, eta=eta, n_rps=self.n_rpm / 60.0, u_p=self.u_p)


OMEGA_LABELS = ("U_dot", "alpha_dot", "beta_dot", "p_dot", "q_dot", "r_dot",
                "z_dot", "phi_dot", "theta_dot", "psi_dot", "n_dot", "u_p_dot")


@dataclass(frozen=True)
class TrimResidual:
    """The twelve level-flight rates (mixed units, all zero at trim)."""

    values: tuple

    def as_array(self):
        return np.array(self.values)

    def max_abs(self):
        return float(np.max(np.abs(self.values)))

    def labelled(self):
        return dict(zip(OMEGA_LABELS, self.values))


@dataclass(frozen=True)
class TrimResult:
    decision: TrimDecision
    residual_norm: float
    iterations: int
    converged: bool
    clamped: bool = False


def trim_residual(d: TrimDecision, U, params: VehicleParams, model=None):
    """Evaluate the level-flight rate vector for a decision at speed U."""
    if model is None:
        model = VehicleModel(params)
    state = d.state(U)
    deriv = model.state_derivative(state, d.command())
    u, v, w = state.nu[0:3]
    ud, vd, wd = deriv.nu[0:3]
    Udot = (u * ud + v * vd + w * wd) / U
    alphadot = (u * wd - w * ud) / (u * u + w * w)
    betadot = (vd * U - v * Udot) / (U * math.sqrt(u * u + w * w))
    # shaft speed is steady by construction; inflow residual from the
    # two-state equation at the balancing torque
    pp = params.prop
    _, updot = propeller_two_state_derivatives(
        shaft_torque_for(d.n_rpm / 60.0, pp), d.n_rpm / 60.0, d.u_p, u, pp,
        params.hydro.X_uu)
    vals = (Udot, alphadot, betadot,
            deriv.nu[3], deriv.nu[4], deriv.nu[5],
            deriv.eta[2], deriv.eta[3], deriv.eta[4], deriv.eta[5],
            0.0, updot)
    return TrimResidual(tuple(float(x) for x in vals))


def _decision_from_vector(x, roll_mode, kappa):
    alpha, beta, theta, aux, n_rpm, u_p, ds, dr = x
    if roll_mode == "free":
        return TrimDecision(alpha, beta, theta, aux, n_rpm, u_p, ds, ds, dr, dr)
    # roll forced to zero: aux is the differential deflection delta_a
    da = aux
    return TrimDecision(alpha, beta, theta, 0.0, n_rpm, u_p,
                        ds + kappa * da / 2.0, ds - kappa * da / 2.0,
                        dr + (1.0 - kappa) * da / 2.0, dr - (1.0 - kappa) * da / 2.0)


def solve_trim(U, params: VehicleParams, guess: TrimDecision | None = None,
               tol=1e-8, max_iter=100, roll_mode="free", kappa=0.5):
    """Solve level flight at total speed U (m/s) by damped Newton iteration.

    Returns a TrimResult; raises ConvergenceError (with the last residual
    norm) if the iteration stalls or the Jacobian becomes singular.
    """
    if U <= 0:
        raise DomainError("trim speed must be positive")
    if roll_mode not in ("free", "zero"):
        raise DomainError(f"unknown roll mode {roll_mode!r}")
    model = VehicleModel(params)

    if guess is None:
        guess = TrimDecision(n_rpm=1200.0, u_p=0.6 * U)
    if roll_mode == "free":
        aux = guess.phi
    else:
        aux = (guess.delta_s1 - guess.delta_s2) + (guess.delta_r1 - guess.delta_r2)
    x = np.array([guess.alpha, guess.beta, guess.theta, aux, guess.n_rpm,
                  guess.u_p, 0.5 * (guess.delta_s1 + guess.delta_s2),
                  0.5 * (guess.delta_r1 + guess.delta_r2)])

    # residual components that are not identically zero at p = q = r = 0
    idx = (0, 1, 2, 3, 4, 5, 6, 11)

    def res(xv):
        d = _decision_from_vector(xv, roll_mode, kappa)
        return trim_residual(d, U, params, model).as_array()[list(idx)]

    r = res(x)
    rnorm = float(np.max(np.abs(r)))
    iterations = 0
    for iterations in range(1, max_iter + 1):
        if rnorm < tol:
            break
        J = np.empty((8, 8))
        for j in range(8):
            h = max(1e-6 * abs(x[j]), 1e-8)
            xp = x.copy()
            xm = x.copy()
            xp[j] += h
            xm[j] -= h
            J[:, j] = (res(xp) - res(xm)) / (2.0 * h)
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            raise ConvergenceError(
                "singular trim Jacobian; try a perturbed initial guess",
                residual_norm=rnorm, iterations=iterations)
        # backtracking: halve the step until the residual norm drops
        lam = 1.0
        for _ in range(20):
            x_new = x + lam * step
            r_new = res(x_new)
            if np.max(np.abs(r_new)) < rnorm:
                break
            lam *= 0.5
        else:
            raise ConvergenceError(
                f"trim line search stalled at residual {rnorm:.3e}",
                residual_norm=rnorm, iterations=iterations)
        x, r = x_new, r_new
        rnorm = float(np.max(np.abs(r)))
    else:
        raise ConvergenceError(
            f"trim did not converge in {max_iter} iterations "
            f"(last residual {rnorm:.3e})",
            residual_norm=rnorm, iterations=max_iter)

    decision = _decision_from_vector(x, roll_mode, kappa)
    fin_max = params.limits.fin_max
    n_max = params.prop.n_max_rpm
    clip = lambda v, lo, hi: min(max(v, lo), hi)
    clamped_dec = replace(
        decision,
        n_rpm=clip(decision.n_rpm, 0.0, n_max),
        delta_s1=clip(decision.delta_s1, -fin_max, fin_max),
        delta_s2=clip(decision.delta_s2, -fin_max, fin_max),
        delta_r1=clip(decision.delta_r1, -fin_max, fin_max),
        delta_r2=clip(decision.delta_r2, -fin_max, fin_max),
    )
    clamped = clamped_dec != decision
    return TrimResult(decision=clamped_dec, residual_norm=rnorm,
                      iterations=iterations, converged=rnorm < tol,
                      clamped=clamped)


def reduced_trim_equations(d: TrimDecision, U, params: VehicleParams):
    """Six small-angle level-flight balances (N and N m residuals).

    These are the analytic approximations of the full trim conditions in
    the small-angle regime (|theta|, |phi| < 0.2 rad): surge, sway, heave,
    roll, pitch, yaw.  Lift terms carry U^2 (u*w = U^2*theta at level
    flight) and the pitch hydrostatic stiffness is -z_g*W.
    """
    rb, hc, pp = params.rb, params.hydro, params.prop
    W, B = rb.W, rb.B
    zg = rb.cg[2]
    n = d.n_rpm / 60.0
    v = U * math.sin(d.beta)
    th, ph = d.theta, d.phi
    S = d.delta_s1 + d.delta_s2
    R = d.delta_r1 + d.delta_r2
    droll = (d.delta_s1 - d.delta_s2) + (d.delta_r1 - d.delta_r2)
    U2 = U * U
    thrust = (1.0 - pp.tau_p) * (pp.a1 * n * n + pp.a2 * n + pp.a3)
    torque = pp.b1 * n * n + pp.b2 * n + pp.b3
    surge = (B - W) * th + hc.X_uu * U2 + thrust
    sway = (W - B) * ph + hc.Y_uv * U * v + hc.Y_vv * v * abs(v) + hc.Y_uu_dr * U2 * R
    heave = ((W - B) * (1.0 - 0.5 * th * th - 0.5 * ph * ph)
             + hc.Z_ww * U2 * th * abs(th) + hc.Z_uw * U2 * th + hc.Z_uu_ds * U2 * S)
    roll = -zg * W * ph + torque + hc.K_roll * droll
    pitch = ((-zg * W + hc.M_uw * U2) * th + hc.M_ww * U2 * th * abs(th)
             + hc.M_uu_ds * U2 * S)
    yaw = hc.N_uv * U * v + hc.N_vv * v * abs(v) + hc.N_uu_dr * U2 * R
    return np.array([surge, sway, heave, roll, pitch, yaw])
