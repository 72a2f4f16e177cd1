"""Session fixtures shared across the test modules.

The stability experiments cost minutes each at acceptance settings, so
every distinct configuration runs once per session through a cached
factory; tests read numbers off the cached reports.  All runs are
seeded, which makes the regression values pinned in the tests
reproducible from session to session.
"""

import numpy as np
import pytest

from halfwave.evolution import evolve
from halfwave.experiments import (
    RunSettings,
    get_family,
    run_single_wave_stability,
    run_two_wave_stability,
)
from halfwave.grid import Field, make_grid
from halfwave.ground_state import solve_ground_state
from halfwave.spectral import sobolev_norm


@pytest.fixture(scope="session")
def grid400():
    """The default experiment grid."""
    return make_grid(4096, 400.0)


@pytest.fixture(scope="session")
def q400(grid400):
    """p = 2, omega = 1 ground state on the default grid."""
    return solve_ground_state(1.0, 2.0, grid400)


@pytest.fixture(scope="session")
def reference_state():
    """p = 2, omega = 1 ground state on the fine reference grid."""
    return solve_ground_state(1.0, 2.0, make_grid(8192, 400.0))


@pytest.fixture(scope="session")
def family2():
    """Wide-reference scaling family for p = 2 (shared solver cache)."""
    return get_family(2.0)


@pytest.fixture(scope="session")
def eigen_grid():
    """Grid small enough for dense eigensolves."""
    return make_grid(2048, 120.0)


@pytest.fixture(scope="session")
def eigen_states(eigen_grid):
    """Ground states at omega = 1 for the three tested nonlinearities."""
    return {p: solve_ground_state(1.0, p, eigen_grid) for p in (1.5, 2.0, 2.5)}


@pytest.fixture(scope="session")
def two_wave():
    """Cached factory for acceptance-scale two-wave stability runs."""
    cache = {}

    def run(alpha: float, sigma: float):
        key = (alpha, sigma)
        if key not in cache:
            cache[key] = run_two_wave_stability(
                RunSettings(alpha=alpha, sigma=sigma)
            )
        return cache[key]

    return run


@pytest.fixture(scope="session")
def single_wave():
    """Cached factory for acceptance-scale single-wave stability runs."""
    cache = {}

    def run(alpha: float, t_final: float = 50.0):
        key = (alpha, t_final)
        if key not in cache:
            cache[key] = run_single_wave_stability(
                RunSettings(p=2.0, omega1=1.0, alpha=alpha, t_final=t_final)
            )
        return cache[key]

    return run


@pytest.fixture(scope="session")
def standing_wave_errors(grid400, q400):
    """H^(1/2) distance to the rotating ground state after T = 10."""
    errors = {}
    for dt in (1e-3, 5e-4):
        traj = evolve(
            Field(grid400, q400.profile.values.astype(complex)),
            T=10.0,
            dt=dt,
            p=2.0,
            stride=0.5,
        )
        target = np.exp(1j * 10.0) * q400.profile.values
        errors[dt] = sobolev_norm(
            Field(grid400, traj.snapshots[-1].values - target), 0.5
        )
    return errors
