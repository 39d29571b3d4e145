import math
from dataclasses import replace

import numpy as np
import pytest

from auvkit.dynamics import (actuator_wrench, ocean_current_body_velocity,
                             ocean_current_step, propeller_thrust_torque,
                             propeller_two_state_derivatives, shaft_torque_for,
                             steady_inflow)
from auvkit.errors import ConfigError, DomainError
from auvkit.params import PropellerParams
from auvkit.state import ActuatorCommand, OceanCurrent

U_4KN = 2.0577
N_CAL_RPS = 1413.0 / 60.0


def test_thrust_balances_drag_at_calibration_point(params):
    pp = params.prop
    thrust, _ = propeller_thrust_torque(N_CAL_RPS, pp)
    # raw thrust equals axial drag divided by (1 - tau_p) at 4 knots
    assert thrust == pytest.approx(1.62 * U_4KN ** 2 / (1.0 - pp.tau_p))


def test_zero_speed_zero_output(params):
    pp = params.prop
    assert propeller_thrust_torque(0.0, pp) == (0.0, 0.0)


def test_thrust_monotone(params):
    pp = params.prop
    ns = np.linspace(0.0, pp.n_max_rpm / 60.0, 200)
    thrusts = [propeller_thrust_torque(float(n), pp)[0] for n in ns]
    assert all(t1 <= t2 + 1e-12 for t1, t2 in zip(thrusts, thrusts[1:]))


def test_reverse_rotation_rejected(params):
    with pytest.raises(DomainError):
        propeller_thrust_torque(-1.0, params.prop)
    with pytest.raises(DomainError):
        propeller_thrust_torque(params.prop.n_max_rpm / 60.0 + 1, params.prop)


def test_two_state_steady_speed(params):
    pp = params.prop
    n = 20.0
    Q = shaft_torque_for(n, pp)
    ndot, _ = propeller_two_state_derivatives(Q, n, 1.0, 2.0, pp,
                                              params.hydro.X_uu)
    assert ndot == pytest.approx(0.0, abs=1e-12)


def test_two_state_inflow_sign(params):
    pp = params.prop
    _, updot = propeller_two_state_derivatives(0.0, 10.0, 0.0, 0.0, pp,
                                               params.hydro.X_uu)
    assert updot > 0.0


def test_two_state_invalid_config(params):
    bad = replace(params.prop, J_m=0.0)
    with pytest.raises(ConfigError):
        propeller_two_state_derivatives(0.0, 1.0, 0.0, 0.0, bad,
                                        params.hydro.X_uu)


def test_steady_inflow_bisection_oracle(params):
    # bisection on du_p/dt = 0, independent of the closed-form root
    pp = params.prop
    X_uu = params.hydro.X_uu
    n, u = N_CAL_RPS, U_4KN

    def f(up):
        return propeller_two_state_derivatives(0.0, n, up, u, pp, X_uu)[1]

    lo, hi = 0.0, 10.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if f(lo) * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
    root = 0.5 * (lo + hi)
    assert abs(f(root)) < 1e-9
    assert steady_inflow(n, u, pp, X_uu) == pytest.approx(root, abs=1e-9)
    # calibrated to the documented 1.2936 m/s inflow within 2%
    assert steady_inflow(n, u, pp, X_uu) == pytest.approx(1.2936, rel=0.02)


def test_current_body_velocity_axes():
    oc = OceanCurrent(U_c=1.0)
    assert ocean_current_body_velocity(oc) == pytest.approx([1.0, 0, 0])
    oc = OceanCurrent(U_c=0.1, beta_c=math.radians(20.0))
    assert ocean_current_body_velocity(oc) == pytest.approx(
        [0.0940, 0.0342, 0.0], abs=5e-5)


def test_current_norm_identity(rng):
    for _ in range(1000):
        oc = OceanCurrent(U_c=rng.uniform(0, 2), alpha_c=rng.uniform(-3, 3),
                          beta_c=rng.uniform(-3, 3))
        v = ocean_current_body_velocity(oc)
        assert np.linalg.norm(v) == pytest.approx(oc.U_c, abs=1e-12)


def test_current_step_steady_state():
    oc = OceanCurrent(U_c=0.5, zeta=1.0, mu=0.25)
    for _ in range(2000):
        oc = ocean_current_step(oc, 0.01)
    assert oc.U_c == pytest.approx(0.25, abs=1e-4)


def test_current_step_frozen_without_decay():
    oc = OceanCurrent(U_c=0.37, zeta=0.0, mu=0.0)
    for _ in range(100):
        oc = ocean_current_step(oc, 0.05)
    assert oc.U_c == 0.37


def test_current_exponential_decay():
    oc = OceanCurrent(U_c=0.5, zeta=1.0, mu=0.0)
    prev = oc.U_c
    for _ in range(100):
        oc = ocean_current_step(oc, 0.01)
        assert oc.U_c < prev  # monotone decay
        prev = oc.U_c
    assert oc.U_c == pytest.approx(0.5 / math.e, abs=1e-6)


def test_actuator_wrench_zero(params):
    w = actuator_wrench(ActuatorCommand(), 0.0, params.prop, params.hydro)
    assert w.as_array() == pytest.approx(np.zeros(6))


def test_actuator_wrench_stern_moment(params):
    d = math.radians(-1.4)
    cmd = ActuatorCommand(n_rps=0.0, delta_s1=d, delta_s2=d)
    w = actuator_wrench(cmd, U_4KN, params.prop, params.hydro)
    assert w.M == pytest.approx(-6.15 * U_4KN ** 2 * 2 * d)
    assert w.M == pytest.approx(1.272, abs=2e-3)


def test_actuator_wrench_rudder_sign_symmetry(params, rng):
    for _ in range(100):
        dr = rng.uniform(-0.3, 0.3)
        u = rng.uniform(0.5, 2.5)
        base = ActuatorCommand(n_rps=10.0, delta_r1=dr, delta_r2=dr)
        flip = ActuatorCommand(n_rps=10.0, delta_r1=-dr, delta_r2=-dr)
        wb = actuator_wrench(base, u, params.prop, params.hydro)
        wf = actuator_wrench(flip, u, params.prop, params.hydro)
        assert wf.Y == pytest.approx(-wb.Y) and wf.N == pytest.approx(-wb.N)
        assert wf.Z == pytest.approx(wb.Z) and wf.M == pytest.approx(wb.M)


def test_actuator_wrench_roll_channel(params):
    # differential stern deflection feeds K through K_roll
    da = 0.1
    cmd = ActuatorCommand(delta_s1=da / 2, delta_s2=-da / 2)
    w = actuator_wrench(cmd, 1.0, params.prop, params.hydro)
    assert cmd.delta_roll == pytest.approx(da)
    assert w.K == pytest.approx(params.hydro.K_roll * da)
