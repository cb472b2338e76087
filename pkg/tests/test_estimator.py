#!/usr/bin/env python3
"""
ABOUTME: Tests for difference sets, minimum-distance selection and the 3·OPT + ε harness
ABOUTME: Exact 1-D crossings, level-ordering membership rules and selection certificates
"""

import math

import numpy as np
import pytest

from densities import GaussianDensity, density_from_spec
from estimator import (
    CandidateClass,
    SelectionResult,
    difference_set_on_points,
    guarantee_harness,
    required_samples,
    sample_complexity_bound,
    select,
    tv_anorm_gap_check,
    yatracos_family,
    yatracos_membership_via_levels,
    yatracos_set,
    yatracos_set_function,
)
from geometry import Polytope
from lab_errors import ConfigError, DimensionMismatchError, SelectionError
from metrics import EmpiricalDistribution
from structure import Level, PiecewisePolytopeDensity


def normal(mean: float, sigma: float = 1.0) -> GaussianDensity:
    return GaussianDensity([mean], [[sigma * sigma]])


def uniform_1d(lo: float, hi: float):
    return density_from_spec(
        {"family": "uniform-convex", "dimension": 1, "params": {"body": "box", "lo": [lo], "hi": [hi]}}
    )


def steps(*levels: tuple[float, float, float]) -> PiecewisePolytopeDensity:
    """1-D piecewise density from (height, lo, hi) triples."""
    return PiecewisePolytopeDensity(
        levels=tuple(Level(y, Polytope.from_points([[lo], [hi]])) for y, lo, hi in levels),
        epsilon=0.5,
        dimension=1,
    )


def test_candidate_class_validation():
    with pytest.raises(SelectionError):
        CandidateClass(())
    with pytest.raises(DimensionMismatchError):
        CandidateClass((normal(0.0), GaussianDensity([0.0, 0.0], np.eye(2))))
    cls = CandidateClass((normal(0.0), normal(1.0)))
    assert cls.labels == ("g0", "g1")
    assert len(cls) == 2
    with pytest.raises(ConfigError):
        cls.permuted([0, 0])


def test_shifted_normals_split_at_the_midpoint():
    cls = CandidateClass((normal(0.0), normal(1.0)))
    A = yatracos_set(cls, 0, 1)
    assert len(A.intervals) == 1
    lo, hi = A.intervals[0]
    assert lo == -math.inf
    assert hi == pytest.approx(0.5, abs=1e-10)
    assert A.contains([0.4])
    assert not A.contains([0.6])


def test_scaled_normals_give_a_bounded_interval():
    cls = CandidateClass((normal(0.0), normal(0.0, 2.0)))
    c = math.sqrt(8.0 * math.log(2.0) / 3.0)
    inner = yatracos_set(cls, 0, 1)
    assert len(inner.intervals) == 1
    assert inner.intervals[0][0] == pytest.approx(-c, abs=1e-9)
    assert inner.intervals[0][1] == pytest.approx(c, abs=1e-9)
    outer = yatracos_set(cls, 1, 0)
    assert len(outer.intervals) == 2
    assert outer.intervals[0][0] == -math.inf
    assert outer.intervals[1][1] == math.inf


def test_uniform_sets_include_common_zero_region():
    cls = CandidateClass((uniform_1d(0.0, 1.0), uniform_1d(0.0, 2.0)))
    A = yatracos_set(cls, 0, 1)
    assert A.intervals == ((-math.inf, 1.0), (2.0, math.inf))


def test_family_lists_ordered_pairs():
    cls = CandidateClass((normal(-1.0), normal(0.0), normal(1.0)))
    family = yatracos_family(cls)
    assert [(A.i, A.j) for A in family] == [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]
    assert yatracos_family(CandidateClass((normal(0.0),))) == []


def test_level_membership_matches_density_comparison():
    g = steps((2.0, 0.0, 1.0), (1.0, -1.0, 2.0))
    g_other = steps((2.0, 0.6, 0.8), (1.0, 0.5, 3.0))
    X = np.linspace(-2.0, 4.0, 601)[:, None]
    via_levels = yatracos_membership_via_levels(g, g_other, X)
    assert np.array_equal(via_levels, g.pdf(X) >= g_other.pdf(X))


def test_level_membership_single_points():
    g = steps((2.0, 0.0, 1.0), (1.0, -1.0, 2.0))
    g_other = steps((1.5, 0.5, 3.0))
    assert yatracos_membership_via_levels(g, g_other, [0.75]) is True
    assert yatracos_membership_via_levels(g, g_other, [1.5]) is False
    assert yatracos_membership_via_levels(g, g_other, [2.5]) is False
    # Outside every polytope both densities vanish
    assert yatracos_membership_via_levels(g, g_other, 5.0) is True


def test_index_set_rule():
    result = yatracos_set_function(
        heights=[2.0, 1.0],
        heights_other=[1.5],
        sets=[frozenset({0}), frozenset({0, 1, 2})],
        sets_other=[frozenset({1, 2, 3})],
        universe=frozenset(range(5)),
    )
    assert result == frozenset({0, 4})


def test_difference_set_on_points_agrees_with_vectorized_rule():
    g = steps((2.0, 0.0, 1.0), (1.0, -1.0, 2.0))
    g_other = steps((1.5, 0.5, 3.0), (0.5, -3.0, 4.0))
    X = np.linspace(-4.0, 5.0, 91)
    members = difference_set_on_points(g, g_other, X)
    expected = np.flatnonzero(yatracos_membership_via_levels(g, g_other, X[:, None]))
    assert members == frozenset(expected.tolist())


def test_required_samples():
    assert required_samples(2, 0.1) == 1000
    assert required_samples(1, 0.2, c=1.0) == 25
    with pytest.raises(ConfigError):
        required_samples(0, 0.1)
    with pytest.raises(ConfigError):
        required_samples(2, 1.5)


def test_sample_complexity_bound_grows_as_epsilon_shrinks():
    assert sample_complexity_bound(2, 0.05) > sample_complexity_bound(2, 0.1)
    assert sample_complexity_bound(3, 0.1) > sample_complexity_bound(2, 0.1)


def test_select_picks_the_true_mean():
    cls = CandidateClass((normal(-1.0), normal(0.0), normal(1.0)))
    samples = EmpiricalDistribution(normal(0.0).sample(2_000, seed=1))
    result = select(cls, samples, seed=2)
    assert result.chosen_index == 1
    assert result.score_matrix.shape == (3, 6)
    assert result.certificate_holds()
    assert result.n == 2_000


def test_selection_is_permutation_invariant_in_one_dimension():
    members = (normal(-0.4), normal(0.1), normal(0.7), normal(1.5))
    cls = CandidateClass(members)
    samples = EmpiricalDistribution(normal(0.0).sample(500, seed=3))
    chosen = cls[select(cls, samples).chosen_index]
    for order in ([3, 2, 1, 0], [1, 3, 0, 2]):
        shuffled = cls.permuted(order)
        assert shuffled[select(shuffled, samples).chosen_index] is chosen


def test_singleton_class_is_chosen_trivially():
    cls = CandidateClass((normal(5.0),))
    result = select(cls, EmpiricalDistribution(np.zeros(10)))
    assert result.chosen_index == 0
    assert result.score_matrix.shape == (1, 0)
    assert result.certificate_holds()


def test_select_rejects_mismatched_samples():
    cls = CandidateClass((normal(0.0), normal(1.0)))
    with pytest.raises(DimensionMismatchError):
        select(cls, EmpiricalDistribution(np.zeros((10, 2))))


def test_select_in_two_dimensions():
    truth = GaussianDensity([0.0, 0.0], np.eye(2))
    cls = CandidateClass((GaussianDensity([2.0, 0.0], np.eye(2)), truth))
    samples = EmpiricalDistribution(truth.sample(1_000, seed=4))
    first = select(cls, samples, integral_budget=20_000, seed=5)
    second = select(cls, samples, integral_budget=20_000, seed=5)
    assert first.chosen_index == 1
    assert np.array_equal(first.score_matrix, second.score_matrix)


def test_selection_result_serializes_seed_sequences():
    result = SelectionResult(0, np.zeros((2, 2)), 10, np.random.SeedSequence(42), 100, [(0, 1), (1, 0)])
    payload = result.to_dict()
    assert payload["seed"]["entropy"] == 42
    assert payload["row_max"] == [0.0, 0.0]


def test_guarantee_harness_meets_threshold():
    truth = normal(0.0)
    cls = CandidateClass((normal(0.3), normal(1.0), normal(2.0)))
    report = guarantee_harness(truth, cls, epsilon=0.2, trials=20, seed=6)
    assert report.n == 250
    assert report.opt_estimate == pytest.approx(2.0 * 0.5596177 - 1.0, abs=1e-5)
    assert report.threshold == pytest.approx(3.0 * report.opt_estimate + 0.2)
    assert report.success_rate == 1.0
    assert len(report.chosen) == 20
    assert 2 not in report.chosen


def test_guarantee_harness_needs_trials():
    cls = CandidateClass((normal(0.0),))
    with pytest.raises(ConfigError):
        guarantee_harness(normal(0.0), cls, epsilon=0.2, trials=0)


@pytest.mark.slow
def test_tv_is_bounded_by_difference_set_norm():
    report = tv_anorm_gap_check(normal(0.0), normal(1.0), epsilon=0.2, seed=7)
    assert report.holds
    assert report.anorm <= report.tv + 1e-5


def random_toy_density(rng: np.random.Generator) -> PiecewisePolytopeDensity:
    """Up to four levels, each the hull of four random points in the plane."""
    count = int(rng.integers(1, 5))
    heights = np.sort(rng.uniform(0.1, 2.0, size=count))[::-1]
    return PiecewisePolytopeDensity(
        levels=tuple(
            Level(float(y), Polytope.from_points(rng.uniform(-1.0, 1.0, size=(4, 2))))
            for y in heights
        ),
        epsilon=0.5,
        dimension=2,
        facet_budget=4,
    )


def test_level_rule_on_random_planar_pairs():
    rng = np.random.default_rng(2024)
    X = rng.uniform(-1.2, 1.2, size=(100_000, 2))
    for _ in range(20):
        g, g_other = random_toy_density(rng), random_toy_density(rng)
        assert np.array_equal(g.pdf(X), g.pdf_min_index(X))
        via_levels = yatracos_membership_via_levels(g, g_other, X)
        assert np.array_equal(via_levels, g.pdf(X) >= g_other.pdf(X))


@pytest.mark.slow
def test_guarantee_when_the_truth_is_a_candidate():
    cls = CandidateClass(tuple(normal(m) for m in (-1.0, -0.5, 0.0, 0.5, 1.0)))
    report = guarantee_harness(cls.members[2], cls, epsilon=0.1, trials=100, seed=21)
    assert report.n == 1000
    assert report.opt_estimate == 0.0
    assert report.success_rate >= 0.9


@pytest.mark.slow
def test_guarantee_under_contamination():
    truth = density_from_spec(
        {
            "family": "gaussian",
            "dimension": 1,
            "params": {"mean": [0.0]},
            "contamination": {
                "weight": 0.1,
                "contaminant": {"family": "gaussian", "dimension": 1, "params": {"mean": [4.0]}},
            },
        }
    )
    cls = CandidateClass(tuple(normal(m) for m in (-1.0, -0.5, 0.0, 0.5, 1.0)))
    report = guarantee_harness(truth, cls, epsilon=0.1, trials=100, seed=22)
    # The best candidate is the uncontaminated base
    assert report.opt_estimate == pytest.approx(0.1 * (2.0 * 0.9772499 - 1.0), abs=1e-4)
    assert report.success_rate >= 0.9


@pytest.mark.slow
def test_guarantee_under_far_uniform_contamination():
    eta, eps = 0.1, 0.1
    truth = density_from_spec(
        {
            "family": "gaussian",
            "dimension": 1,
            "params": {"mean": [0.0]},
            "contamination": {
                "weight": eta,
                "contaminant": {
                    "family": "uniform-convex",
                    "dimension": 1,
                    "params": {"body": "box", "lo": [10.0], "hi": [11.0]},
                },
            },
        }
    )
    cls = CandidateClass(tuple(normal(m) for m in (-1.0, -0.5, 0.0, 0.5, 1.0)))
    report = guarantee_harness(truth, cls, epsilon=eps, trials=100, seed=23)
    # The contaminant sits where N(0, 1) has no mass, so OPT is the weight itself
    assert report.opt_estimate == pytest.approx(eta, abs=1e-3)
    # ‖f - h‖₁ ≤ 3·OPT₁ + 4ε, halved into total variation
    assert max(report.tv_errors) <= 3.0 * report.opt_estimate + 2.0 * eps
    assert report.success_rate >= 0.9
