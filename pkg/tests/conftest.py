import numpy as np
import pytest

from auvkit.params import VehicleParams

U_4KN = 2.0577  # m/s, the documented 4-knot operating speed


@pytest.fixture(scope="session")
def params():
    return VehicleParams().validate()


@pytest.fixture(scope="session")
def trim_4kn(params):
    from auvkit.trim import solve_trim
    return solve_trim(U_4KN, params)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


def random_state(rng, speed_scale=2.0, rate_scale=0.5):
    """Random but physically sane vehicle state for property tests."""
    from auvkit.state import VehicleState
    nu = np.concatenate([rng.uniform(-speed_scale, speed_scale, 3),
                         rng.uniform(-rate_scale, rate_scale, 3)])
    eta = np.concatenate([rng.uniform(-50, 50, 3),
                          [rng.uniform(-0.6, 0.6), rng.uniform(-0.9, 0.9),
                           rng.uniform(-np.pi, np.pi)]])
    return VehicleState(nu=nu, eta=eta, n_rps=rng.uniform(0, 40),
                        u_p=rng.uniform(0, 2))


def random_command(rng, fin_max=0.35, n_max_rps=2500 / 60.0):
    from auvkit.state import ActuatorCommand
    return ActuatorCommand(n_rps=rng.uniform(0, n_max_rps),
                           delta_s1=rng.uniform(-fin_max, fin_max),
                           delta_s2=rng.uniform(-fin_max, fin_max),
                           delta_r1=rng.uniform(-fin_max, fin_max),
                           delta_r2=rng.uniform(-fin_max, fin_max))
