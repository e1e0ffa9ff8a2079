import math

import numpy as np
import pytest
from scipy.special import beta as beta_fn

from lambda_fv_lab import (
    DomainError,
    OutOfRange,
    SingularEndpoint,
    beta_measure,
    custom,
    from_table,
    kingman,
    moment_integral,
    total_mass,
    uniform,
)


def test_kingman_is_a_pure_atom_at_zero():
    m = kingman(2.5)
    assert m.atom0 == 2.5
    assert m.atom1 == 0.0
    assert m.density is None
    assert total_mass(m) == 2.5


def test_uniform_total_mass_is_one():
    assert abs(total_mass(uniform()) - 1.0) < 1e-10


@pytest.mark.parametrize("beta", [0.25, 0.5, 1.0, 1.5, 1.75])
def test_beta_measure_is_normalized(beta):
    # density x^{1-beta} (1-x)^{beta-1} / B(2-beta, beta) integrates to 1
    assert abs(total_mass(beta_measure(beta)) - 1.0) < 1e-9


@pytest.mark.parametrize("beta", [0.0, 2.0, -1.0, 2.5])
def test_beta_measure_rejects_out_of_range_exponent(beta):
    with pytest.raises(OutOfRange):
        beta_measure(beta)


def test_custom_rejects_negative_atoms():
    with pytest.raises(OutOfRange):
        custom(atom0=-0.1)
    with pytest.raises(OutOfRange):
        custom(atom1=-0.1)


def test_moment_integral_counts_atoms_at_the_endpoints():
    m = custom(atom0=0.5, atom1=0.25)
    got = moment_integral(m, lambda x: np.full_like(x, 3.0))
    assert abs(got - 3.0 * 0.75) < 1e-12


def test_moment_integral_of_one_recovers_total_mass():
    m = beta_measure(1.5)
    got = moment_integral(m, lambda x: np.ones_like(x))
    assert abs(got - total_mass(m)) < 1e-9


def test_moment_integral_singular_at_an_occupied_endpoint():
    m = custom(atom0=1.0)
    with pytest.raises(SingularEndpoint):
        moment_integral(m, lambda x: 1.0 / x)


def test_moment_integral_beta_moments_match_beta_function():
    """x^k moments of the Beta(2-b, b) density have a closed form."""
    b = 1.5
    m = beta_measure(b)
    for k in range(1, 4):
        oracle = beta_fn(2.0 - b + k, b) / beta_fn(2.0 - b, b)
        got = moment_integral(m, lambda x, k=k: x ** float(k))
        assert abs(got - oracle) < 1e-9


def test_from_table_matches_the_sampled_density():
    xs = np.linspace(0.01, 0.99, 40)
    ys = 2.0 * xs
    m = from_table(xs, ys)
    # interior evaluation interpolates; mass approximates int 2x dx = 1
    mid = m.density(np.array([0.5]))[0]
    assert abs(mid - 1.0) < 1e-6
    assert abs(total_mass(m) - 1.0) < 0.05


def test_from_table_rejects_unsorted_or_negative_input():
    with pytest.raises(OutOfRange):
        from_table([0.5, 0.2], [1.0, 1.0])
    with pytest.raises(OutOfRange):
        from_table([0.2, 0.5], [1.0, -1.0])


def test_density_outside_unit_interval_is_rejected():
    m = beta_measure(1.5)
    with pytest.raises(DomainError):
        m.density(np.array([-0.5]))
    with pytest.raises(DomainError):
        m.density(np.array([1.5]))


def test_measure_labels_round_trip_in_repr():
    assert "beta(1.5)" in repr(beta_measure(1.5))
    assert "kingman" in repr(kingman())
