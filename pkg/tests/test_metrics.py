#!/usr/bin/env python3
"""
ABOUTME: Tests for set masses, the A-norm and TV / L1 / Hellinger distances
ABOUTME: Closed-form Gaussian and uniform oracles in d = 1, Monte Carlo agreement in d = 2
"""

import math

import numpy as np
import pytest
from scipy import stats

from densities import GaussianDensity, GenericLogConcaveDensity, density_from_spec
from geometry import SetPredicate, interval_set, intervals_set
from lab_errors import BudgetExhaustedError, ConfigError, DimensionMismatchError
from metrics import (
    EmpiricalDistribution,
    MassPool,
    anorm,
    empirical_measure,
    hellinger,
    hellinger_tv_sandwich,
    l1_distance,
    set_integral,
    tv_distance,
)


def uniform_1d(lo: float, hi: float):
    return density_from_spec(
        {"family": "uniform-convex", "dimension": 1, "params": {"body": "box", "lo": [lo], "hi": [hi]}}
    )


def normal_tv(shift: float) -> float:
    return 2.0 * stats.norm.cdf(shift / 2.0) - 1.0


def test_empirical_measure_counts_closed_intervals():
    e = EmpiricalDistribution(np.array([0.0, 0.5, 1.0, 2.0]))
    assert e.n == 4
    assert e.dimension == 1
    assert empirical_measure(e, interval_set(0.0, 1.0)) == pytest.approx(0.75)


def test_empirical_distribution_needs_samples():
    with pytest.raises(ConfigError):
        EmpiricalDistribution(np.zeros((0, 2)))


def test_gaussian_interval_mass_uses_cdf():
    f = GaussianDensity([0.0], [[1.0]])
    estimate = set_integral(f, interval_set(-1.0, 1.0))
    assert estimate.method == "cdf-1d"
    assert estimate.stderr == 0.0
    assert estimate.value == pytest.approx(stats.norm.cdf(1.0) - stats.norm.cdf(-1.0))


def test_piecewise_constant_mass_is_exact():
    f = uniform_1d(0.0, 1.0)
    estimate = set_integral(f, intervals_set([(0.25, 0.5), (0.75, 2.0)]))
    assert estimate.method == "exact-1d"
    assert estimate.value == pytest.approx(0.5)


def test_sampler_mass_in_two_dimensions():
    f = GaussianDensity([0.0, 0.0], np.eye(2))
    half_plane = SetPredicate(2, lambda X: X[:, 0] >= 0.0, "x >= 0")
    estimate = set_integral(f, half_plane, budget=100_000, seed=1)
    assert estimate.method == "sampler"
    assert abs(estimate.value - 0.5) < 4.0 * estimate.stderr


def test_monte_carlo_mass_without_sampler():
    f = GenericLogConcaveDensity(
        lambda X: -0.5 * np.sum(X**2, axis=1) - math.log(2.0 * math.pi), [0.0, 0.0]
    )
    pool = MassPool(f, budget=200_000, seed=2)
    assert pool.mode == "monte-carlo"
    estimate = pool.mass(SetPredicate(2, lambda X: X[:, 1] <= 0.0))
    assert abs(estimate.value - 0.5) < 4.0 * estimate.stderr + 1e-3


def test_mass_pool_reuses_points():
    f = GaussianDensity([0.0, 0.0], np.eye(2))
    pool = MassPool(f, budget=10_000, seed=3)
    A = SetPredicate(2, lambda X: X[:, 0] >= 0.0)
    assert pool.mass(A) == pool.mass(A)


def test_empty_budget_is_exhausted():
    f = GaussianDensity([0.0, 0.0], np.eye(2))
    with pytest.raises(BudgetExhaustedError):
        MassPool(f, budget=0).mass(SetPredicate(2, lambda X: X[:, 0] >= 0.0))


def test_mass_dimension_mismatch():
    f = GaussianDensity([0.0, 0.0], np.eye(2))
    with pytest.raises(DimensionMismatchError):
        set_integral(f, interval_set(0.0, 1.0))


@pytest.mark.parametrize(
    "points, expected",
    [
        (np.arange(1, 10) / 10.0, 1.0 / 10.0),
        ((2.0 * np.arange(1, 10) - 1.0) / 18.0, 1.0 / 18.0),
    ],
)
def test_anorm_against_uniform(points, expected):
    f = uniform_1d(0.0, 1.0)
    e = EmpiricalDistribution(points)
    family = [interval_set(0.0, float(x)) for x in points]
    result = anorm(f, e, family)
    assert result.value == pytest.approx(expected)
    assert result.stderr == 0.0


def test_anorm_of_identical_inputs_is_zero():
    f = GaussianDensity([0.0], [[1.0]])
    assert anorm(f, f, [interval_set(0.0, 1.0)]).value == 0.0


def test_anorm_needs_sets():
    f = GaussianDensity([0.0], [[1.0]])
    with pytest.raises(ConfigError):
        anorm(f, f, [])


def test_anorm_reports_argmax():
    f = GaussianDensity([0.0], [[1.0]])
    g = GaussianDensity([1.0], [[1.0]])
    family = [interval_set(5.0, 6.0), interval_set(-math.inf, 0.5), interval_set(-0.1, 0.1)]
    result = anorm(f, g, family)
    assert result.argmax == 1
    # The half-line cut at the midpoint carries the full TV gap
    assert result.value == pytest.approx(normal_tv(1.0))


@pytest.mark.parametrize("shift", [0.25, 1.0, 3.0])
def test_gaussian_tv_and_l1_on_grid(shift):
    f = GaussianDensity([0.0], [[1.0]])
    g = GaussianDensity([shift], [[1.0]])
    tv = tv_distance(f, g)
    assert tv.method == "grid-1d"
    assert tv.value == pytest.approx(normal_tv(shift), abs=1e-6)
    assert l1_distance(f, g).value == pytest.approx(2.0 * tv.value, abs=2e-6)


def test_gaussian_hellinger_on_grid():
    f = GaussianDensity([0.0], [[1.0]])
    g = GaussianDensity([1.0], [[1.0]])
    h = hellinger(f, g)
    expected_h2 = 2.0 * (1.0 - math.exp(-1.0 / 8.0))
    assert h.squared == pytest.approx(expected_h2, abs=1e-6)
    assert h.value == pytest.approx(math.sqrt(expected_h2), abs=1e-5)


def test_uniform_tv_uses_breakpoints():
    assert tv_distance(uniform_1d(0.0, 1.0), uniform_1d(0.0, 2.0)).value == pytest.approx(0.5)


def test_distance_to_itself_is_zero():
    f = GaussianDensity([0.0, 0.0], np.eye(2))
    assert tv_distance(f, f).value == 0.0
    assert hellinger(f, f).squared == 0.0


def test_monte_carlo_tv_in_two_dimensions():
    f = GaussianDensity([0.0, 0.0], np.eye(2))
    g = GaussianDensity([1.0, 0.0], np.eye(2))
    tv = tv_distance(f, g, budget=200_000, seed=4)
    assert tv.method == "monte-carlo"
    assert abs(tv.value - normal_tv(1.0)) < 4.0 * tv.stderr + 1e-3


def test_monte_carlo_tolerance_is_enforced():
    f = GaussianDensity([0.0, 0.0], np.eye(2))
    g = GaussianDensity([1.0, 0.0], np.eye(2))
    with pytest.raises(BudgetExhaustedError):
        tv_distance(f, g, budget=200, seed=0, tol=1e-6)


def test_grid_method_refused_in_two_dimensions():
    f = GaussianDensity([0.0, 0.0], np.eye(2))
    g = GaussianDensity([1.0, 0.0], np.eye(2))
    with pytest.raises(ConfigError):
        tv_distance(f, g, method="grid-1d")


def test_sandwich_chains():
    f = GaussianDensity([0.0], [[1.0]])
    close = hellinger_tv_sandwich(f, GaussianDensity([0.5], [[1.0]]))
    assert close.stated_chain_ok
    assert close.normalized_chain_ok
    # Far apart, h² approaches 2 while TV approaches 1
    far = hellinger_tv_sandwich(f, GaussianDensity([6.0], [[1.0]]))
    assert not far.stated_chain_ok
    assert far.normalized_chain_ok
