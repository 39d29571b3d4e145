"""Independent oracles for the vehicle model.

The component-form dynamics here are hand-expanded scalar equations of
motion (force/moment balances with the combined data-sheet coefficients),
written without the package's matrix assembly.  They serve as the second
route of the dual-form equivalence check and were verified independently
against the documented 4-knot level-flight operating point.
"""

import math

import numpy as np


def component_forces(nu, cmd, phi, theta, params):
    """External force vector (X, Y, Z, K, M, N) for the component form,
    rigid-body velocity products moved to the right-hand side."""
    u, v, w, p, q, r = nu
    n_rps, ds1, ds2, dr1, dr2 = cmd
    rb, hc, pp = params.rb, params.hydro, params.prop
    m = rb.m
    xg, yg, zg = rb.cg
    xb, yb, zb = rb.cb
    W, B = rb.W, rb.B

    thrust = (1.0 - pp.tau_p) * (pp.a1 * n_rps * abs(n_rps) + pp.a2 * n_rps + pp.a3)
    torque = pp.b1 * n_rps * abs(n_rps) + pp.b2 * n_rps + pp.b3
    droll = (ds1 - ds2) + (dr1 - dr2)

    sth, cth = math.sin(theta), math.cos(theta)
    sph, cph = math.sin(phi), math.cos(phi)
    XHS = -(W - B) * sth
    YHS = (W - B) * cth * sph
    ZHS = (W - B) * cth * cph
    KHS = -(yg * W - yb * B) * cth * cph - (zg * W - zb * B) * cth * sph
    MHS = -(zg * W - zb * B) * sth - (xg * W - xb * B) * cth * cph
    NHS = -(xg * W - xb * B) * cth * sph - (yg * W - yb * B) * sth

    u2 = u * u
    X = (XHS + hc.X_uu * u * abs(u) + hc.X_wq * w * q + hc.X_qq * q * abs(q)
         + hc.X_vr * v * r + hc.X_rr * r * r + thrust)
    Y = (YHS + hc.Y_vv * v * abs(v) + hc.Y_rr * r * abs(r) + hc.Y_ur * u * r
         + hc.Y_wp * w * p + hc.Y_pq * p * q + hc.Y_uv * u * v
         + hc.Y_uu_dr * u2 * (dr1 + dr2))
    Z = (ZHS + hc.Z_ww * w * abs(w) + hc.Z_qq * q * abs(q) + hc.Z_uq * u * q
         + hc.Z_vp * v * p + hc.Z_rp * r * p + hc.Z_uw * u * w
         + hc.Z_uu_ds * u2 * (ds1 + ds2))
    K = (KHS + hc.K_pp * p * abs(p) + hc.K_up * u * p + torque
         + hc.K_roll * droll)
    M = (MHS + hc.M_ww * w * abs(w) + hc.M_qq * q * abs(q) + hc.M_uq * u * q
         + hc.M_vp * v * p + hc.M_rp * r * p + hc.M_uw * u * w
         + hc.M_uu_ds * u2 * (ds1 + ds2))
    N = (NHS + hc.N_vv * v * abs(v) + hc.N_rr * r * abs(r) + hc.N_ur * u * r
         + hc.N_wp * w * p + hc.N_pq * p * q + hc.N_uv * u * v
         + hc.N_uu_dr * u2 * (dr1 + dr2))

    # rigid-body velocity products (standard Newton-Euler left-hand side)
    X -= m * (-v * r + w * q - xg * (q * q + r * r) + yg * p * q + zg * p * r)
    Y -= m * (-w * p + u * r - yg * (r * r + p * p) + zg * q * r + xg * q * p)
    Z -= m * (-u * q + v * p - zg * (p * p + q * q) + xg * r * p + yg * r * q)
    K -= ((rb.Izz - rb.Iyy) * q * r
          + m * (yg * (-u * q + v * p) - zg * (-w * p + u * r)))
    M -= ((rb.Ixx - rb.Izz) * r * p
          + m * (zg * (-v * r + w * q) - xg * (-u * q + v * p)))
    N -= ((rb.Iyy - rb.Ixx) * p * q
          + m * (xg * (-w * p + u * r) - yg * (-v * r + w * q)))
    return np.array([X, Y, Z, K, M, N])


def component_mass_matrix(params):
    """Mass matrix in the combined (rigid body + added mass) written form."""
    rb, hc = params.rb, params.hydro
    m = rb.m
    xg, yg, zg = rb.cg
    return np.array([
        [m - hc.X_udot, 0, 0, 0, m * zg, -m * yg],
        [0, m - hc.Y_vdot, 0, -m * zg, 0, m * xg - hc.Y_rdot],
        [0, 0, m - hc.Z_wdot, m * yg, -m * xg - hc.Z_qdot, 0],
        [0, -m * zg, m * yg, rb.Ixx - hc.K_pdot, 0, 0],
        [m * zg, 0, -m * xg - hc.M_wdot, 0, rb.Iyy - hc.M_qdot, 0],
        [-m * yg, m * xg - hc.N_vdot, 0, 0, 0, rb.Izz - hc.N_rdot],
    ])


def component_acceleration(nu, cmd, phi, theta, params, current_uvw=None):
    """nu_dot of the expanded component-form model.

    ``current_uvw`` subtracts an ocean-current body velocity from the
    linear components before evaluating the hydrodynamic terms.
    """
    nu = np.asarray(nu, dtype=float)
    nu_r = nu.copy()
    if current_uvw is not None:
        nu_r[0:3] -= np.asarray(current_uvw, dtype=float)
    F = component_forces(nu_r, cmd, phi, theta, params)
    return np.linalg.solve(component_mass_matrix(params), F)


def euler_rates_reference(eta, nu):
    """Textbook kinematics: position rates via the rotation matrix built
    from elementary rotations Rz(psi) Ry(theta) Rx(phi), angle rates via
    the standard Euler-rate map (independent of the package formulas)."""
    phi, theta, psi = eta[3], eta[4], eta[5]

    def Rz(a):
        return np.array([[math.cos(a), -math.sin(a), 0],
                         [math.sin(a), math.cos(a), 0], [0, 0, 1]])

    def Ry(a):
        return np.array([[math.cos(a), 0, math.sin(a)], [0, 1, 0],
                         [-math.sin(a), 0, math.cos(a)]])

    def Rx(a):
        return np.array([[1, 0, 0], [0, math.cos(a), -math.sin(a)],
                         [0, math.sin(a), math.cos(a)]])

    R = Rz(psi) @ Ry(theta) @ Rx(phi)
    pos_rate = R @ nu[0:3]
    p, q, r = nu[3:6]
    ang_rate = np.array([
        p + (q * math.sin(phi) + r * math.cos(phi)) * math.tan(theta),
        q * math.cos(phi) - r * math.sin(phi),
        (q * math.sin(phi) + r * math.cos(phi)) / math.cos(theta),
    ])
    return np.concatenate([pos_rate, ang_rate])
