"""Nonlinear 6-DOF vehicle model.

The equations of motion are assembled in modular (matrix) form

    M nudot = tau + g_hs(eta) - C_RB(nu_r) nu_r - C_A(nu_r) nu_r - D(nu_r) nu_r

with nu_r = nu - nu_c the velocity relative to the ocean current (the
current direction is fixed relative to the vehicle, so nudot_r = nudot).
Position rates use nu, the velocity over ground.

Sign conventions:

* ``hydrostatic_wrench`` returns the restoring wrench as a *force* on the
  right-hand side (Z entry is W - B at level attitude: negative, i.e.
  upward, for a buoyant vehicle).
* The tabulated cross-flow coefficients (X_wq, M_uw, N_uv, ...) are combined
  values that already include the added-mass (Munk) couplings.  Since
  C_A(nu) regenerates those couplings, ``damping_matrix`` carries only the
  lift residue of each cross term (table value minus the C_A share), plus a
  few cross slots C_A does not produce (X_qq, X_rr, Y_pq, Z_rp, M_vp, N_wp).
  The assembled force therefore matches the component-form equations with
  the tabulated coefficients exactly.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError, DomainError
from .kinematics import euler_rates
from .params import HydroCoefficients, PropellerParams, RigidBodyParams, VehicleParams
from .state import ActuatorCommand, OceanCurrent, VehicleState, Wrench

# mass and inertia -----------------------------------------------------------


def rigid_body_mass_matrix(rb: RigidBodyParams):
    m = rb.m
    xg, yg, zg = rb.cg
    return np.array([
        [m, 0, 0, 0, m * zg, -m * yg],
        [0, m, 0, -m * zg, 0, m * xg],
        [0, 0, m, m * yg, -m * xg, 0],
        [0, -m * zg, m * yg, rb.Ixx, 0, 0],
        [m * zg, 0, -m * xg, 0, rb.Iyy, 0],
        [-m * yg, m * xg, 0, 0, 0, rb.Izz],
    ])


def added_mass_matrix(hc: HydroCoefficients):
    return -np.array([
        [hc.X_udot, 0, 0, 0, 0, 0],
        [0, hc.Y_vdot, 0, 0, 0, hc.Y_rdot],
        [0, 0, hc.Z_wdot, 0, hc.Z_qdot, 0],
        [0, 0, 0, hc.K_pdot, 0, 0],
        [0, 0, hc.M_wdot, 0, hc.M_qdot, 0],
        [0, hc.N_vdot, 0, 0, 0, hc.N_rdot],
    ])


def mass_matrix(rb: RigidBodyParams, hc: HydroCoefficients):
    """Total mass matrix M = M_RB + M_A.  Raises ConfigError if singular."""
    M = rigid_body_mass_matrix(rb) + added_mass_matrix(hc)
    if abs(np.linalg.det(M)) < 1e-9:
        raise ConfigError("mass matrix is singular for these parameters")
    return M


# Coriolis / centripetal -----------------------------------------------------


def coriolis_rb(nu, rb: RigidBodyParams):
    """Rigid-body Coriolis/centripetal matrix (skew-symmetric form).

    Products of inertia are taken as zero: the hull has two planes of
    symmetry and the body origin sits on the centreline.
    """
    u, v, w, p, q, r = nu
    m = rb.m
    xg, yg, zg = rb.cg
    Ixx, Iyy, Izz = rb.Ixx, rb.Iyy, rb.Izz
    C = np.zeros((6, 6))
    C[0, 3] = m * (yg * q + zg * r)
    C[0, 4] = -m * (xg * q - w)
    C[0, 5] = -m * (xg * r + v)
    C[1, 3] = -m * (yg * p + w)
    C[1, 4] = m * (zg * r + xg * p)
    C[1, 5] = -m * (yg * r - u)
    C[2, 3] = -m * (zg * p - v)
    C[2, 4] = -m * (zg * q + u)
    C[2, 5] = m * (xg * p + yg * q)
    C[3, 0] = -C[0, 3]
    C[4, 0] = -C[0, 4]
    C[5, 0] = -C[0, 5]
    C[3, 1] = -C[1, 3]
    C[4, 1] = -C[1, 4]
    C[5, 1] = -C[1, 5]
    C[3, 2] = -C[2, 3]
    C[4, 2] = -C[2, 4]
    C[5, 2] = -C[2, 5]
    C[3, 4] = Izz * r
    C[3, 5] = -Iyy * q
    C[4, 3] = -Izz * r
    C[4, 5] = Ixx * p
    C[5, 3] = Iyy * q
    C[5, 4] = -Ixx * p
    return C


def coriolis_added(nu, hc: HydroCoefficients):
    """Added-mass Coriolis matrix C_A (diagonal added-mass form, skew)."""
    u, v, w = nu[0], nu[1], nu[2]
    p, q, r = nu[3], nu[4], nu[5]
    au = hc.X_udot * u
    av = hc.Y_vdot * v
    aw = hc.Z_wdot * w
    bp = hc.K_pdot * p
    bq = hc.M_qdot * q
    br = hc.N_rdot * r
    C = np.zeros((6, 6))
    C[0, 4] = -aw
    C[0, 5] = av
    C[1, 3] = aw
    C[1, 5] = -au
    C[2, 3] = -av
    C[2, 4] = au
    C[3, 1] = -aw
    C[3, 2] = av
    C[3, 4] = -br
    C[3, 5] = bq
    C[4, 0] = aw
    C[4, 2] = -au
    C[4, 3] = br
    C[4, 5] = -bp
    C[5, 0] = -av
    C[5, 1] = au
    C[5, 3] = -bq
    C[5, 4] = bp
    return C


def coriolis_matrix(nu, rb: RigidBodyParams, hc: HydroCoefficients):
    """C(nu) = C_RB(nu) + C_A(nu)."""
    nu = np.asarray(nu, dtype=float)
    if not np.isfinite(nu).all():
        raise DomainError("non-finite velocity")
    return coriolis_rb(nu, rb) + coriolis_added(nu, hc)


# damping --------------------------------------------------------------------


def lift_residues(hc: HydroCoefficients):
    """Cross-term coefficients net of the C_A (added-mass) share.

    Keys follow the combined-coefficient names; values are what remains for
    the damping matrix once C_A supplies the Munk couplings.
    """
    return {
        "X_wq": hc.X_wq - hc.Z_wdot,
        "X_qq": hc.X_qq,
        "X_vr": hc.X_vr + hc.Y_vdot,
        "X_rr": hc.X_rr,
        "Y_uv": hc.Y_uv,
        "Y_ur": hc.Y_ur - hc.X_udot,
        "Y_wp": hc.Y_wp + hc.Z_wdot,
        "Y_pq": hc.Y_pq,
        "Z_uw": hc.Z_uw,
        "Z_uq": hc.Z_uq + hc.X_udot,
        "Z_vp": hc.Z_vp - hc.Y_vdot,
        "Z_rp": hc.Z_rp,
        "K_vw": hc.Y_vdot - hc.Z_wdot,
        "K_qr": hc.M_qdot - hc.N_rdot,
        "K_up": hc.K_up,
        "M_uw": hc.M_uw + hc.Z_wdot - hc.X_udot,
        "M_uq": hc.M_uq,
        "M_vp": hc.M_vp,
        "M_rp": hc.M_rp - (hc.K_pdot - hc.N_rdot),
        "N_uv": hc.N_uv - (hc.Y_vdot - hc.X_udot),
        "N_ur": hc.N_ur,
        "N_wp": hc.N_wp,
        "N_pq": hc.N_pq - (hc.M_qdot - hc.K_pdot),
    }


def damping_matrix(nu, hc: HydroCoefficients, DL=None):
    """D(nu) = D_L + D_n1(nu) + D_n2(nu).

    D_L defaults to zero (no linear damping is tabulated); pass a 6x6 array
    to override.  D_n1 holds the quadratic |.|-terms, D_n2 the velocity-
    scaled cross flow / lift terms (net of the C_A share, see module docs).
    """
    u, v, w, p, q, r = (float(x) for x in nu)
    if not all(math.isfinite(x) for x in (u, v, w, p, q, r)):
        raise DomainError("non-finite velocity")
    k = lift_residues(hc)
    D = np.zeros((6, 6)) if DL is None else np.array(DL, dtype=float)
    # D_n1: quadratic drag
    D[0, 0] -= hc.X_uu * abs(u)
    D[1, 1] -= hc.Y_vv * abs(v)
    D[1, 5] -= hc.Y_rr * abs(r)
    D[2, 2] -= hc.Z_ww * abs(w)
    D[2, 4] -= hc.Z_qq * abs(q)
    D[3, 3] -= hc.K_pp * abs(p)
    D[4, 2] -= hc.M_ww * abs(w)
    D[4, 4] -= hc.M_qq * abs(q)
    D[5, 1] -= hc.N_vv * abs(v)
    D[5, 5] -= hc.N_rr * abs(r)
    # D_n2: lift residues
    D[0, 4] -= k["X_wq"] * w + k["X_qq"] * abs(q)
    D[0, 5] -= k["X_vr"] * v + k["X_rr"] * r
    D[1, 1] -= k["Y_uv"] * u
    D[1, 3] -= k["Y_wp"] * w + k["Y_pq"] * q
    D[1, 5] -= k["Y_ur"] * u
    D[2, 2] -= k["Z_uw"] * u
    D[2, 3] -= k["Z_vp"] * v + k["Z_rp"] * r
    D[2, 4] -= k["Z_uq"] * u
    D[3, 1] -= k["K_vw"] * w
    D[3, 3] -= k["K_up"] * u
    D[3, 4] -= k["K_qr"] * r
    D[4, 1] -= k["M_vp"] * p
    D[4, 2] -= k["M_uw"] * u
    D[4, 3] -= k["M_rp"] * r
    D[4, 4] -= k["M_uq"] * u
    D[5, 1] -= k["N_uv"] * u
    D[5, 3] -= k["N_wp"] * w + k["N_pq"] * q
    D[5, 5] -= k["N_ur"] * u
    return D


# hydrostatics ---------------------------------------------------------------


def hydrostatic_wrench(phi, theta, rb: RigidBodyParams):
    """Restoring force/moment from weight and buoyancy (body frame).

    Depends only on roll and pitch.  Returned as a right-hand-side force:
    at level attitude the Z entry is W - B (negative = net upward for a
    buoyant vehicle).
    """
    W, B = rb.W, rb.B
    xg, yg, zg = rb.cg
    xb, yb, zb = rb.cb
    cth, sth = math.cos(theta), math.sin(theta)
    cph, sph = math.cos(phi), math.sin(phi)
    return Wrench(
        X=-(W - B) * sth,
        Y=(W - B) * cth * sph,
        Z=(W - B) * cth * cph,
        K=-(yg * W - yb * B) * cth * cph - (zg * W - zb * B) * cth * sph,
        M=-(zg * W - zb * B) * sth - (xg * W - xb * B) * cth * cph,
        N=-(xg * W - xb * B) * cth * sph - (yg * W - yb * B) * sth,
    )


# propeller ------------------------------------------------------------------


def propeller_thrust_torque(n_rps, pp: PropellerParams):
    """Raw thrust (N) and hull reaction torque (N m) from the fitted
    second-order polynomials at shaft speed n (rev/s).

    The thrust reduction factor (1 - tau_p) is applied by the actuator
    wrench, not here.  Reverse rotation is out of the model's domain.
    """
    if not math.isfinite(n_rps):
        raise DomainError("non-finite shaft speed")
    n_max = pp.n_max_rpm / 60.0
    if n_rps < 0.0 or n_rps > n_max:
        raise DomainError(f"shaft speed {n_rps} rps outside [0, {n_max:.2f}]")
    thrust = pp.a1 * n_rps * n_rps + pp.a2 * n_rps + pp.a3
    torque = pp.b1 * n_rps * n_rps + pp.b2 * n_rps + pp.b3
    return thrust, torque


def propeller_two_state_derivatives(Q, n_rps, u_p, u, pp: PropellerParams, X_uu):
    """Shaft dynamics: (dn/dt, du_p/dt) for motor torque Q (N m).

    dn/dt follows the torque balance with linear friction K_n and quadratic
    load Q_nn; du_p/dt is the axial-inflow momentum balance with damping
    coefficients d_f0, d_f derived from the axial drag X_uu and the
    (tau_p, a_p, w_p) flow parameters.
    """
    pp.validate()
    d_f0, d_f = pp.inflow_damping(X_uu)
    ndot = (Q - pp.K_n * n_rps - pp.Q_nn * n_rps * abs(n_rps)) / pp.J_m
    updot = (pp.T_nn * n_rps * abs(n_rps)
             - d_f0 * u_p
             - d_f * abs(u_p) * (u_p - (1.0 - pp.w_p) * u)) / pp.m_f
    return ndot, updot


def steady_inflow(n_rps, u, pp: PropellerParams, X_uu):
    """Positive root of du_p/dt = 0 at shaft speed n and surge u."""
    d_f0, d_f = pp.inflow_damping(X_uu)
    c1 = d_f0 - d_f * (1.0 - pp.w_p) * u
    c0 = -pp.T_nn * n_rps * abs(n_rps)
    disc = c1 * c1 - 4.0 * d_f * c0
    return (-c1 + math.sqrt(max(disc, 0.0))) / (2.0 * d_f)


def shaft_torque_for(n_rps, pp: PropellerParams):
    """Motor torque holding shaft speed n at steady state."""
    return pp.K_n * n_rps + pp.Q_nn * n_rps * abs(n_rps)


# ocean current --------------------------------------------------------------


def ocean_current_body_velocity(oc: OceanCurrent):
    """Current velocity in body axes from (U_c, alpha_c, beta_c)."""
    ca, sa = math.cos(oc.alpha_c), math.sin(oc.alpha_c)
    cb, sb = math.cos(oc.beta_c), math.sin(oc.beta_c)
    return np.array([oc.U_c * ca * cb, oc.U_c * sb, oc.U_c * sa * cb])


def ocean_current_derivative(oc: OceanCurrent, noise_sample=0.0):
    """dU_c/dt = mu + sigma*noise - zeta*U_c (white noise held over a step)."""
    return oc.mu + oc.noise_sigma * noise_sample - oc.zeta * oc.U_c


def ocean_current_step(oc: OceanCurrent, dt, noise_sample=0.0):
    """Advance the current speed one step with the same RK4 scheme as the
    main loop (noise is zero-order-held across the step)."""
    if dt <= 0:
        raise DomainError("dt must be positive")
    u0 = oc.U_c

    def f(u):
        return oc.mu + oc.noise_sigma * noise_sample - oc.zeta * u

    k1 = f(u0)
    k2 = f(u0 + 0.5 * dt * k1)
    k3 = f(u0 + 0.5 * dt * k2)
    k4 = f(u0 + dt * k3)
    u1 = u0 + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
    out = oc.copy()
    out.U_c = max(0.0, u1)
    return out


# actuation ------------------------------------------------------------------


def actuator_wrench(cmd: ActuatorCommand, u, pp: PropellerParams,
                    hc: HydroCoefficients, n_override=None):
    """Control wrench: propeller thrust/torque plus fin lift at surge u.

    Fin forces scale with u^2 and the summed pair deflections; the roll
    channel takes K_roll times the differential fin content of the command.
    ``n_override`` substitutes the actual shaft speed for the commanded one
    (two-state propeller mode).
    """
    cmd.require_finite()
    n = cmd.n_rps if n_override is None else n_override
    thrust, torque = propeller_thrust_torque(n, pp)
    u2 = u * u
    ds = cmd.delta_s1 + cmd.delta_s2
    dr = cmd.delta_r1 + cmd.delta_r2
    droll = cmd.delta_roll
    if droll != 0.0 and hc.K_roll is None:
        raise ConfigError("hydro.K_roll is required for differential fin commands")
    return Wrench(
        X=(1.0 - pp.tau_p) * thrust,
        Y=hc.Y_uu_dr * u2 * dr,
        Z=hc.Z_uu_ds * u2 * ds,
        K=torque + hc.K_roll * droll,
        M=hc.M_uu_ds * u2 * ds,
        N=hc.N_uu_dr * u2 * dr,
    )


# assembled model ------------------------------------------------------------


class VehicleModel:
    """Vehicle parameters with the factored mass matrix cached.

    ``prop_mode`` selects the propeller representation: "polynomial" (shaft
    speed follows the command instantly; the default) or "two_state"
    (integrates shaft speed and axial inflow).
    """

    def __init__(self, params: VehicleParams, prop_mode="polynomial"):
        if prop_mode not in ("polynomial", "two_state"):
            raise ConfigError(f"unknown propeller mode {prop_mode!r}")
        params.validate()
        self.params = params
        self.prop_mode = prop_mode
        self.M = mass_matrix(params.rb, params.hydro)
        self.M_inv = np.linalg.inv(self.M)

    def state_derivative(self, state: VehicleState, cmd: ActuatorCommand,
                         current: OceanCurrent | None = None):
        """Full state derivative (returned in a VehicleState container)."""
        state.require_finite()
        p = self.params
        nu = state.nu
        if current is not None and current.U_c != 0.0:
            nu_r = nu.copy()
            nu_r[0:3] -= ocean_current_body_velocity(current)
        else:
            nu_r = nu

        if self.prop_mode == "two_state":
            n_act = state.n_rps
            Q = shaft_torque_for(cmd.n_rps, p.prop)
            ndot, updot = propeller_two_state_derivatives(
                Q, n_act, state.u_p, nu_r[0], p.prop, p.hydro.X_uu)
            tau = actuator_wrench(cmd, nu_r[0], p.prop, p.hydro, n_override=n_act)
        else:
            ndot = 0.0
            _, updot = propeller_two_state_derivatives(
                shaft_torque_for(cmd.n_rps, p.prop), cmd.n_rps, state.u_p,
                nu_r[0], p.prop, p.hydro.X_uu)
            tau = actuator_wrench(cmd, nu_r[0], p.prop, p.hydro)

        g = hydrostatic_wrench(state.eta[3], state.eta[4], p.rb)
        C = coriolis_rb(nu_r, p.rb) + coriolis_added(nu_r, p.hydro)
        D = damping_matrix(nu_r, p.hydro)
        rhs = tau.as_array() + g.as_array() - (C + D) @ nu_r
        nudot = self.M_inv @ rhs
        etadot = euler_rates(state.eta, nu, guard=p.limits.euler_guard)
        return VehicleState(nu=nudot, eta=etadot, n_rps=ndot, u_p=updot)


def state_derivative(state, cmd, params: VehicleParams, current=None,
                     prop_mode="polynomial"):
    """Convenience wrapper around VehicleModel for one-off evaluations."""
    return VehicleModel(params, prop_mode).state_derivative(state, cmd, current)
