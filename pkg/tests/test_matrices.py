import math
from dataclasses import replace

import numpy as np
import pytest

from auvkit.dynamics import (coriolis_added, coriolis_matrix, coriolis_rb,
                             damping_matrix, hydrostatic_wrench, mass_matrix)
from auvkit.params import HydroCoefficients, RigidBodyParams

from conftest import random_state


def test_mass_matrix_surge_entry(params):
    M = mass_matrix(params.rb, params.hydro)
    assert M[0, 0] == pytest.approx(30.5 + 0.93)  # m - X_udot = 31.43 kg


def test_mass_matrix_rigid_body_only():
    rb = RigidBodyParams(cg=(0.0, 0.0, 0.0))
    zero_added = HydroCoefficients(X_udot=0, Y_vdot=0, Y_rdot=0, Z_wdot=0,
                                   Z_qdot=0, K_pdot=0, M_wdot=0, M_qdot=0,
                                   N_vdot=0, N_rdot=0)
    M = mass_matrix(rb, zero_added)
    assert M == pytest.approx(np.diag([rb.m, rb.m, rb.m, rb.Ixx, rb.Iyy, rb.Izz]))


def test_mass_matrix_symmetric_positive_definite(params):
    M = mass_matrix(params.rb, params.hydro)
    assert np.max(np.abs(M - M.T)) < 1e-12
    assert (np.linalg.eigvalsh(M) > 0).all()
    assert np.isfinite(np.linalg.cond(M))


def test_added_mass_diagonal_signs(params):
    hc = params.hydro
    for name in ("X_udot", "Y_vdot", "Z_wdot", "K_pdot", "M_qdot", "N_rdot"):
        assert getattr(hc, name) <= 0


def test_coriolis_zero_at_rest(params):
    C = coriolis_matrix(np.zeros(6), params.rb, params.hydro)
    assert np.max(np.abs(C)) == 0.0


def test_coriolis_added_skew_symmetric(params, rng):
    for _ in range(1000):
        nu = rng.uniform(-3, 3, 6)
        CA = coriolis_added(nu, params.hydro)
        assert np.max(np.abs(CA + CA.T)) < 1e-12


def test_coriolis_rigid_body_skew_symmetric(params, rng):
    for _ in range(200):
        nu = rng.uniform(-3, 3, 6)
        C = coriolis_rb(nu, params.rb)
        assert np.max(np.abs(C + C.T)) < 1e-12


def test_coriolis_added_pure_surge_pattern(params):
    u = 2.0
    CA = coriolis_added(np.array([u, 0, 0, 0, 0, 0]), params.hydro)
    au = params.hydro.X_udot * u
    expected = np.zeros((6, 6))
    expected[1, 5] = -au
    expected[2, 4] = au
    expected[4, 2] = -au
    expected[5, 1] = au
    assert CA == pytest.approx(expected)


def test_damping_pure_surge_value(params):
    D = damping_matrix(np.array([2.0, 0, 0, 0, 0, 0]), params.hydro)
    assert D[0, 0] == pytest.approx(3.24)  # -X_uu * |u| = 1.62 * 2


def test_damping_zero_velocity_is_linear_part(params):
    assert np.max(np.abs(damping_matrix(np.zeros(6), params.hydro))) == 0.0
    DL = np.diag([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
    D = damping_matrix(np.zeros(6), params.hydro, DL=DL)
    assert D == pytest.approx(DL)


@pytest.mark.parametrize("axis", [0, 2, 5])
def test_damping_dissipative_on_pure_axis(params, axis):
    # nu^T D nu >= 0 for pure surge, heave and yaw motions
    for mag in (-2.0, -0.5, 0.5, 2.0):
        nu = np.zeros(6)
        nu[axis] = mag
        D = damping_matrix(nu, params.hydro)
        assert nu @ D @ nu >= 0.0


def test_hydrostatic_neutral_is_zero():
    rb = RigidBodyParams(W=306.0, B=306.0, cg=(0, 0, 0), cb=(0, 0, 0))
    g = hydrostatic_wrench(0.2, -0.1, rb)
    assert g.as_array() == pytest.approx(np.zeros(6), abs=1e-12)


def test_hydrostatic_level_attitude():
    rb = RigidBodyParams(W=30.5 * 9.81, B=306.0, cg=(0, 0, 0.0192))
    g = hydrostatic_wrench(0.0, 0.0, rb)
    assert g.Z == pytest.approx(30.5 * 9.81 - 306.0)   # -6.795 N (upward)
    assert g.Z == pytest.approx(-6.8, abs=0.01)
    assert g.K == 0.0 and g.X == 0.0 and g.Y == 0.0 and g.N == 0.0
    assert g.M == 0.0  # x_g = x_b = 0 at level attitude


def test_hydrostatic_pitched():
    rb = RigidBodyParams(W=30.5 * 9.81, B=306.0, cg=(0, 0, 0.0192))
    g = hydrostatic_wrench(0.0, math.pi / 6, rb)
    assert g.X == pytest.approx(-(rb.W - rb.B) * 0.5)
    assert g.X == pytest.approx(3.4, abs=0.01)


def test_hydrostatics_depend_only_on_roll_pitch(params, rng):
    # same (phi, theta) must give the same wrench regardless of anything else
    for _ in range(100):
        phi = rng.uniform(-1, 1)
        theta = rng.uniform(-1, 1)
        g1 = hydrostatic_wrench(phi, theta, params.rb)
        g2 = hydrostatic_wrench(phi, theta, params.rb)
        assert g1.as_array() == pytest.approx(g2.as_array(), abs=0.0)


def test_restoring_moment_is_stabilizing(params):
    # CG below CB: positive pitch must produce a nose-down moment
    g = hydrostatic_wrench(0.0, 0.1, params.rb)
    assert g.M < 0
    g = hydrostatic_wrench(0.1, 0.0, params.rb)
    assert g.K < 0
