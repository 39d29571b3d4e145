"""Body <-> earth kinematic transforms (Euler-angle form).

T(eta2) rotates body linear velocities into NED position rates; A(eta2) maps
body angular rates into Euler angle rates.  A(eta2) is singular at pitch
+/- 90 deg; all entry points enforce a guard band below the singularity.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, SingularityError

HALF_PI = 0.5 * math.pi


def wrap_angle(angle):
    """Wrap an angle to (-pi, pi]."""
    wrapped = math.fmod(angle + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


def check_pitch(theta, guard=1e-3):
    if abs(theta) >= HALF_PI - guard:
        raise SingularityError(
            f"pitch {theta:.4f} rad within {guard} of the +/-pi/2 kinematic singularity")


def linear_transform(phi, theta, psi):
    """T(eta2): body linear velocity -> NED position rate (orthonormal)."""
    cph, sph = math.cos(phi), math.sin(phi)
    cth, sth = math.cos(theta), math.sin(theta)
    cps, sps = math.cos(psi), math.sin(psi)
    return np.array([
        [cps * cth, -sps * cph + cps * sth * sph, sps * sph + cps * sth * cph],
        [sps * cth, cps * cph + sps * sth * sph, -cps * sph + sps * sth * cph],
        [-sth, cth * sph, cth * cph],
    ])


def angular_transform(phi, theta, guard=1e-3):
    """A(eta2): body angular rate -> Euler angle rate."""
    check_pitch(theta, guard)
    cph, sph = math.cos(phi), math.sin(phi)
    cth, tth = math.cos(theta), math.tan(theta)
    return np.array([
        [1.0, sph * tth, cph * tth],
        [0.0, cph, -sph],
        [0.0, sph / cth, cph / cth],
    ])


def euler_rates(eta, nu, guard=1e-3):
    """d/dt eta for pose eta = [x y z phi theta psi] and velocity nu.

    Raises SingularityError when the pitch is within ``guard`` of +/- 90 deg
    and DomainError on non-finite input.
    """
    eta = np.asarray(eta, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if not (np.isfinite(eta).all() and np.isfinite(nu).all()):
        raise DomainError("non-finite pose or velocity")
    phi, theta, psi = eta[3], eta[4], eta[5]
    out = np.empty(6)
    out[0:3] = linear_transform(phi, theta, psi) @ nu[0:3]
    out[3:6] = angular_transform(phi, theta, guard) @ nu[3:6]
    return out
