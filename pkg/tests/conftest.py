import numpy as np
import pytest

from lambda_fv_lab import (
    beta_measure,
    build_rate_table,
    kingman,
    simulate_lookdown,
    uniform,
)


@pytest.fixture(scope="session")
def kingman_table():
    return build_rate_table(kingman(), 64)


@pytest.fixture(scope="session")
def uniform_table():
    return build_rate_table(uniform(), 64)


@pytest.fixture(scope="session")
def beta15_table():
    return build_rate_table(beta_measure(1.5), 64)


@pytest.fixture(scope="session")
def beta05_table():
    return build_rate_table(beta_measure(0.5), 64)


@pytest.fixture(scope="session")
def small_traj():
    """One reusable Kingman lookdown run, small enough for eager motion."""
    return simulate_lookdown(kingman(), n=12, d=2, T=1.0, rng_seed=101)


@pytest.fixture()
def rng():
    return np.random.default_rng(2024)
