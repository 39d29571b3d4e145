import math

import numpy as np
import pytest

from auvkit.control import (CascadedController, ControlConfig, PdGains,
                            ReferenceFilter, SmcParams, allocate_roll,
                            depth_outer, pitch_inner, reference_filter_step,
                            roll_control, smc_inner, speed_control, yaw_inner,
                            yaw_outer)
from auvkit.errors import ConfigError, DomainError

GAINS = PdGains(kp=0.1, kd=0.05, out_min=-0.35, out_max=0.35)


def test_depth_outer_zero_error():
    assert depth_outer(0.0, 0.0, GAINS) == 0.0


def test_depth_outer_direct_formula():
    g = PdGains(kp=0.1, kd=0.0, out_min=-0.35, out_max=0.35)
    assert depth_outer(1.0, 0.0, g) == pytest.approx(-0.1)


def test_depth_outer_saturates():
    assert depth_outer(100.0, 0.0, GAINS) == -0.35
    assert depth_outer(-100.0, 0.0, GAINS) == 0.35


def test_pitch_inner_mirror():
    g = PdGains(kp=2.0, kd=0.5, out_min=-0.35, out_max=0.35)
    assert pitch_inner(0.0, 0.0, g) == 0.0
    assert pitch_inner(0.05, 0.0, g) == pytest.approx(-0.1)
    assert pitch_inner(10.0, 0.0, g) == -0.35


def test_yaw_inner_wraps_error():
    g = PdGains(kp=1.0, kd=0.0, out_min=-0.35, out_max=0.35)
    # psi_ref = 179 deg, psi = -179 deg -> error is -2 deg, not +358
    e = math.radians(179 - (-179))
    assert yaw_inner(e, 0.0, g) == pytest.approx(
        -1.0 * math.radians(-2.0), abs=1e-12)


def test_yaw_outer_sign_steers_toward_positive_error():
    g = PdGains(kp=0.1, kd=0.0, out_min=-0.9, out_max=0.9)
    assert yaw_outer(1.0, 0.0, g) > 0.0


def test_speed_control_feedforward():
    g = PdGains(kp=5.0, kd=0.0)
    assert speed_control(0.0, 0.0, g, 20.0, 41.7) == 20.0
    assert speed_control(100.0, 0.0, g, 20.0, 41.7) == 41.7
    assert speed_control(-100.0, 0.0, g, 20.0, 41.7) == 0.0


def test_pd_gains_validation():
    with pytest.raises(ConfigError):
        PdGains(kp=-1.0)
    with pytest.raises(ConfigError):
        PdGains(kp=1.0, out_min=1.0, out_max=-1.0)


def test_allocation_identities(rng):
    # pre-saturation pair sums are preserved to IEEE rounding (the two fin
    # additions each round once, so the identity holds to 1 ulp)
    for _ in range(1000):
        ds = rng.uniform(-0.3, 0.3)
        dr = rng.uniform(-0.3, 0.3)
        da = rng.uniform(-0.6, 0.6)
        kappa = rng.uniform(0.0, 1.0)
        s1, s2, r1, r2 = allocate_roll(ds, dr, da, kappa)
        # each fin rounds once at the working magnitude, so the sums hold
        # to a few 1e-16-scale ulps
        assert s1 + s2 == pytest.approx(2.0 * ds, abs=5e-16)
        assert r1 + r2 == pytest.approx(2.0 * dr, abs=5e-16)
        assert (s1 - s2) + (r1 - r2) == pytest.approx(da, abs=1e-15)


def test_allocation_sums_exact_on_dyadic_inputs():
    # on dyadic inputs every intermediate is exact, so the identity is
    # bit-level
    for ds, dr, da, kappa in ((0.25, -0.125, 0.5, 0.5), (0.0, 0.0, 0.75, 1.0),
                              (-0.0625, 0.03125, -0.25, 0.25)):
        s1, s2, r1, r2 = allocate_roll(ds, dr, da, kappa)
        assert s1 + s2 == 2.0 * ds
        assert r1 + r2 == 2.0 * dr


def test_allocation_trivial_cases():
    assert allocate_roll(0.1, -0.2, 0.0, 0.5) == (0.1, 0.1, -0.2, -0.2)
    s1, s2, r1, r2 = allocate_roll(0.0, 0.0, 0.2, 1.0)
    assert r1 == r2 == 0.0 and s1 == -s2 == 0.1


def test_allocation_saturation_and_domain():
    s1, s2, r1, r2 = allocate_roll(0.3, 0.0, 0.4, 1.0, fin_max=0.35)
    assert s1 == 0.35 and s2 == pytest.approx(0.1)
    with pytest.raises(DomainError):
        allocate_roll(0.0, 0.0, 0.0, 1.5)


def test_smc_regimes():
    p = SmcParams(gamma1=1.0, gamma2=2.0, gamma3=0.3, boundary_layer=0.05)
    assert smc_inner(0.0, 0.0, p) == 0.0
    # far outside the boundary layer: pure switching at +/- gamma3
    assert smc_inner(1.0, 1.0, p) == 0.3
    assert smc_inner(-1.0, -1.0, p) == -0.3
    # inside the layer the law is linear in s
    e, edot = 0.004, 0.002
    s = p.gamma1 * edot + p.gamma2 * e
    assert abs(s) < p.boundary_layer
    assert smc_inner(e, edot, p) == pytest.approx(p.gamma3 * s / p.boundary_layer)


def test_smc_validation():
    with pytest.raises(ConfigError):
        SmcParams(gamma1=0.0, gamma2=1.0, gamma3=0.1, boundary_layer=0.05)
    with pytest.raises(ConfigError):
        SmcParams(gamma1=1.0, gamma2=1.0, gamma3=0.1, boundary_layer=0.0)


def test_roll_control_sign():
    g = PdGains(kp=2.0, kd=0.5, out_min=-0.5, out_max=0.5)
    assert roll_control(0.1, 0.0, g) == pytest.approx(-0.2)


def test_reference_filter_analytic_response():
    tau, dt, target = 2.0, 0.01, 1.0
    f = ReferenceFilter(tau, 0.0)
    for k in range(1, 501):
        x = reference_filter_step(target, dt, f)
        expected = target * (1.0 - math.exp(-k * dt / tau))
        assert x == pytest.approx(expected, abs=1e-12)


def test_reference_filter_limits():
    f = ReferenceFilter(5.0, 0.7)
    assert f.step(0.7, 0.01) == pytest.approx(0.7)   # target = state: no change
    g = ReferenceFilter(1e6, 0.0)
    assert abs(g.step(1.0, 0.01)) < 1e-7              # huge tau barely moves


def test_saturation_bounds_hold_for_random_inputs(rng):
    cfg = ControlConfig()
    loops = ((depth_outer, cfg.depth), (pitch_inner, cfg.pitch),
             (yaw_inner, cfg.yaw), (yaw_outer, cfg.lateral),
             (roll_control, cfg.roll))
    for _ in range(1000):
        e = rng.uniform(-1e4, 1e4)
        edot = rng.uniform(-1e3, 1e3)
        for fn, gains in loops:
            out = fn(e, edot, gains)
            assert gains.out_min <= out <= gains.out_max
        smc = smc_inner(e, edot, cfg.smc_yaw)
        assert -cfg.smc_yaw.gamma3 <= smc <= cfg.smc_yaw.gamma3


def test_cascade_step_outputs_within_limits(params, rng):
    from auvkit.state import VehicleState
    cfg = ControlConfig()
    ctl = CascadedController(cfg, n_feedforward_rps=23.5, fin_max=0.35,
                             n_max_rps=41.7, u_ref0=2.05, z_ref0=60.0)
    refs = {"u_ref": 2.05, "z_ref": 60.0, "y_ref": 0.0, "phi_ref": 0.0,
            "psi_track": 0.0}
    for _ in range(200):
        state = VehicleState(
            nu=rng.uniform(-2, 2, 6),
            eta=np.concatenate([rng.uniform(-100, 100, 3),
                                [rng.uniform(-0.5, 0.5),
                                 rng.uniform(-0.8, 0.8),
                                 rng.uniform(-np.pi, np.pi)]]))
        out = ctl.step(state, refs, 0.01)
        cmd = out.command
        for fin in (cmd.delta_s1, cmd.delta_s2, cmd.delta_r1, cmd.delta_r2):
            assert abs(fin) <= 0.35 + 1e-12
        assert 0.0 <= cmd.n_rps <= 41.7


def test_step_reference_produces_bounded_response(params):
    """A 50 m depth set-point step must not kick the pitch reference to
    saturation on the first sample (the reference filter absorbs it) and
    all outputs stay bounded and finite through the transient."""
    from auvkit.state import VehicleState
    cfg = ControlConfig()
    ctl = CascadedController(cfg, n_feedforward_rps=23.5, fin_max=0.35,
                             n_max_rps=41.7, u_ref0=2.05, z_ref0=10.0)
    state = VehicleState(nu=np.array([2.05, 0, 0, 0, 0, 0]),
                         eta=np.array([0, 0, 10.0, 0, 0, 0]))
    refs = {"u_ref": 2.05, "z_ref": 10.0, "y_ref": 0.0, "phi_ref": 0.0,
            "psi_track": 0.0}
    ctl.step(state, refs, 0.01)
    refs["z_ref"] = 60.0  # 50 m step
    out = ctl.step(state, refs, 0.01)
    assert abs(out.theta_ref) < 0.05  # far from the 0.35 rad saturation
    for _ in range(200):
        out = ctl.step(state, refs, 0.01)
        cmd = out.command
        assert np.isfinite([cmd.delta_s1, cmd.delta_s2, cmd.delta_r1,
                            cmd.delta_r2, cmd.n_rps]).all()
        assert abs(cmd.delta_s1) <= 0.35 and abs(cmd.delta_s2) <= 0.35
