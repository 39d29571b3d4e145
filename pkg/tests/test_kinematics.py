import math

import numpy as np
import pytest

from auvkit.errors import DomainError, SingularityError
from auvkit.kinematics import (angular_transform, euler_rates, linear_transform,
                               wrap_angle)

from oracles import euler_rates_reference


def test_identity_transform_at_zero_attitude():
    rates = euler_rates(np.zeros(6), np.array([1.0, 0, 0, 0, 0, 0]))
    assert rates == pytest.approx([1, 0, 0, 0, 0, 0])


def test_pitch_singularity_guard():
    eta = np.zeros(6)
    eta[4] = math.pi / 2 - 1e-4
    with pytest.raises(SingularityError):
        euler_rates(eta, np.zeros(6))
    eta[4] = -math.pi / 2 + 1e-4
    with pytest.raises(SingularityError):
        euler_rates(eta, np.zeros(6))


def test_non_finite_rejected():
    eta = np.zeros(6)
    eta[0] = np.nan
    with pytest.raises(DomainError):
        euler_rates(eta, np.zeros(6))


def test_orthogonality_and_determinant(rng):
    # T^T T = I within 1e-12 and det = +1 over 1000 random attitudes
    for _ in range(1000):
        phi = rng.uniform(-np.pi, np.pi)
        theta = rng.uniform(-1.4, 1.4)
        psi = rng.uniform(-np.pi, np.pi)
        T = linear_transform(phi, theta, psi)
        assert np.max(np.abs(T.T @ T - np.eye(3))) < 1e-12
        assert np.linalg.det(T) == pytest.approx(1.0, abs=1e-12)


def test_matches_elementary_rotation_reference(rng):
    for _ in range(200):
        eta = np.concatenate([rng.uniform(-5, 5, 3),
                              [rng.uniform(-np.pi, np.pi),
                               rng.uniform(-1.2, 1.2),
                               rng.uniform(-np.pi, np.pi)]])
        nu = rng.uniform(-2, 2, 6)
        assert euler_rates(eta, nu) == pytest.approx(
            euler_rates_reference(eta, nu), abs=1e-12)


def test_angular_transform_inverse_consistency():
    A = angular_transform(0.3, 0.4)
    # A maps body rates to Euler rates; its inverse must reproduce p, q, r
    pqr = np.array([0.1, -0.2, 0.3])
    assert np.linalg.solve(A, A @ pqr) == pytest.approx(pqr)


@pytest.mark.parametrize("angle,expected", [
    (0.0, 0.0),
    (math.pi, math.pi),
    (-math.pi, math.pi),
    (3 * math.pi / 2, -math.pi / 2),
    (math.radians(179) - math.radians(-179), math.radians(-2)),
])
def test_wrap_angle(angle, expected):
    assert wrap_angle(angle) == pytest.approx(expected, abs=1e-12)
