#!/usr/bin/env python3
"""
ABOUTME: Tests for dichotomy enumeration, shattering searches and growth counts
ABOUTME: Known VC dimensions of intervals and halfspaces plus the interval discrepancy rate
"""

import numpy as np
import pytest
from scipy import stats

from densities import GaussianDensity, GenericLogConcaveDensity, density_from_spec
from geometry import interval_set
from lab_errors import ConfigError
from vclab import (
    SetFamilyHandle,
    difference_family,
    growth_bound,
    growth_count,
    interval_sup_bruteforce,
    interval_sup_statistic,
    search_grid,
    shatters,
    toy_piecewise_grid,
    vc_dimension_bound,
    vc_estimate,
    vc_rate_experiment,
)


INTERVALS = SetFamilyHandle("intervals-1d")
HALFLINES = SetFamilyHandle("halfspaces", {"dimension": 1})
HALFPLANES = SetFamilyHandle("halfspaces", {"dimension": 2})


def test_family_validation():
    with pytest.raises(ConfigError):
        SetFamilyHandle("circles")
    with pytest.raises(ConfigError):
        SetFamilyHandle("halfspaces")
    with pytest.raises(ConfigError):
        SetFamilyHandle("finite-list", {"sets": []})
    with pytest.raises(ConfigError):
        SetFamilyHandle("piecewise-difference", {"pairs": []})


def test_empty_point_set_has_one_labeling():
    assert INTERVALS.dichotomies([]) == {()}


def test_interval_dichotomy_count():
    # Contiguous runs of 5 distinct points plus the empty set
    assert len(INTERVALS.dichotomies([0.3, 0.1, 0.5, 0.9, 0.7])) == 16


def test_repeated_coordinates_are_labelled_together():
    labelings = INTERVALS.dichotomies([0.2, 0.2, 0.6])
    assert (True, False, False) not in labelings
    assert (True, True, False) in labelings


def test_halfplanes_on_square_corners():
    square = [[0, 0], [1, 0], [1, 1], [0, 1]]
    labelings = HALFPLANES.dichotomies(square)
    # n² - n + 2 for points in general position
    assert len(labelings) == 14
    # Diagonals cannot be separated
    assert (True, False, True, False) not in labelings


def test_three_points_are_shattered_by_halfplanes():
    assert shatters(HALFPLANES, [[0, 0], [1, 0], [0, 1]]).shattered
    check = shatters(HALFPLANES, [[0, 0], [1, 1], [2, 2]])
    assert not check.shattered
    assert check.needed == 8


def test_finite_list_family():
    family = SetFamilyHandle("finite-list", {"sets": [interval_set(0.0, 1.0), interval_set(2.0, 3.0)]})
    check = shatters(family, [0.5, 2.5])
    assert check.count == 2
    assert not check.shattered


def test_shatter_refuses_large_point_sets():
    with pytest.raises(ConfigError):
        shatters(INTERVALS, np.linspace(0.0, 1.0, 21))


def test_search_grid_shapes():
    assert search_grid(1).shape == (8, 1)
    assert search_grid(2).shape == (16, 2)
    assert search_grid(3).shape == (27, 3)
    with pytest.raises(ConfigError):
        search_grid(4)


@pytest.mark.parametrize(
    "family, expected",
    [(INTERVALS, 2), (HALFLINES, 2), (HALFPLANES, 3)],
)
def test_exhaustive_vc_estimates(family, expected):
    report = vc_estimate(family)
    assert report.exhaustive
    assert report.shattered_size == expected
    assert len(report.witness_points) == expected
    assert shatters(family, report.witness_points).shattered


@pytest.mark.slow
def test_randomized_lower_bound_in_three_dimensions():
    family = SetFamilyHandle("halfspaces", {"dimension": 3})
    assert not family.has_exact_enumerator
    report = vc_estimate(family, k_max=5, search_budget=200, seed=1)
    assert not report.exhaustive
    assert 3 <= report.shattered_size <= 4


def test_vc_estimate_rejects_bad_k():
    with pytest.raises(ConfigError):
        vc_estimate(INTERVALS, k_max=0)


def test_bound_formulas():
    assert growth_bound(1, 1, 1, 2) == 8
    assert vc_dimension_bound(2, 0.05) > vc_dimension_bound(2, 0.1)


def test_toy_grid_size():
    members = toy_piecewise_grid(1, 1, 1)
    # Three heights times six half-lines
    assert len(members) == 18
    with pytest.raises(ConfigError):
        toy_piecewise_grid(3, 1, 1)


def test_growth_of_toy_difference_family():
    family = difference_family(toy_piecewise_grid(1, 1, 1), L=1, H=1)
    points = [0.1, 0.4, 0.6, 0.9]
    report = growth_count(family, points)
    assert report.n == 4
    assert 1 < report.count <= 16
    assert report.within_power_bound
    assert report.formula_bound == growth_bound(1, 1, 1, 4)
    assert report.count <= report.formula_bound
    assert report.fitted_constant > 0.0
    # g = g' gives the whole line
    assert (True, True, True, True) in family.dichotomies(points)


def test_growth_count_stays_at_toy_scale():
    family = difference_family(toy_piecewise_grid(1, 1, 1), L=1, H=1)
    with pytest.raises(ConfigError):
        growth_count(family, np.linspace(0.0, 1.0, 13))


def test_interval_statistic_single_point():
    assert interval_sup_statistic([0.5], stats.uniform.cdf) == pytest.approx(1.0)


def test_interval_statistic_matches_bruteforce():
    x = np.random.default_rng(3).uniform(size=40)
    fast = interval_sup_statistic(x, stats.uniform.cdf)
    slow = interval_sup_bruteforce(x, stats.uniform.cdf)
    assert fast == pytest.approx(slow, abs=1e-12)


def test_interval_statistic_needs_samples():
    with pytest.raises(ConfigError):
        interval_sup_statistic([], stats.uniform.cdf)


def test_rate_experiment_slope():
    report = vc_rate_experiment(GaussianDensity([0.0], [[1.0]]), [50, 200, 800], reps=30, seed=4)
    assert -0.75 < report.slope < -0.25
    assert report.fitted_constant > 0.0
    assert len(report.means) == 3


@pytest.mark.slow
def test_rate_on_the_unit_interval():
    uniform = density_from_spec(
        {"family": "uniform-convex", "dimension": 1, "params": {"body": "box", "lo": [0.0], "hi": [1.0]}}
    )
    report = vc_rate_experiment(uniform, [100, 1_000, 10_000, 100_000], reps=50, seed=9)
    assert report.slope == pytest.approx(-0.5, abs=0.1)


def test_rate_experiment_needs_a_cdf():
    with pytest.raises(ConfigError):
        vc_rate_experiment(GaussianDensity([0.0, 0.0], np.eye(2)), [10, 20], reps=2)
    generic = GenericLogConcaveDensity(lambda X: -np.abs(X[:, 0]) - np.log(2.0), [0.0])
    with pytest.raises(ConfigError):
        vc_rate_experiment(generic, [10, 20], reps=2)
