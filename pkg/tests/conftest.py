import numpy as np
import pytest

from etdwave.certificate import find_feasible
from etdwave.simulate import run_closed_loop
from etdwave.trigger import ControllerPolicy
from etdwave.wave1d import Grid1D

REFERENCE_HORIZON = 10.0


@pytest.fixture(scope="session")
def grid():
    return Grid1D(n_interior=255, courant=0.5)


@pytest.fixture(scope="session")
def initial_data(grid):
    """Reference initial profiles: z0 = sin(x), dz/dt(0) = sin(2x)."""
    return np.sin(grid.x), np.sin(2.0 * grid.x)


@pytest.fixture(scope="session")
def certified(grid):
    """Feasible certificate for unit damping on the reference domain."""
    report = find_feasible(1.0, 1.0)
    assert report.feasible
    return report.params


@pytest.fixture(scope="session")
def certified_trace(grid, initial_data, certified):
    """Event-triggered run driven by the certified trigger threshold."""
    z0, w0 = initial_data
    policy = ControllerPolicy(kind="event_triggered", alpha=1.0, gamma=certified.gamma)
    trace, _ = run_closed_loop(
        grid, z0, w0, policy, REFERENCE_HORIZON,
        epsilon=certified.epsilon, delta=certified.delta,
        lambda1=certified.lambda1, lambda2=certified.lambda2,
        c_omega=certified.c_omega,
    )
    return trace


@pytest.fixture(scope="session")
def continuous_trace(grid, initial_data, certified):
    z0, w0 = initial_data
    policy = ControllerPolicy(kind="continuous", alpha=1.0)
    trace, _ = run_closed_loop(
        grid, z0, w0, policy, REFERENCE_HORIZON, epsilon=certified.epsilon,
        delta=certified.delta, c_omega=certified.c_omega,
    )
    return trace
