#!/usr/bin/env python3
"""
ABOUTME: Tests for the log-concave density families, their level sets and samplers
ABOUTME: Covers the JSON density specification format and contaminated mixtures
"""

import math

import numpy as np
import pytest

from densities import (
    ContaminatedDensity,
    GaussianDensity,
    GenericLogConcaveDensity,
    ProductExponentialDensity,
    ProductLaplaceDensity,
    UniformConvexDensity,
    density_from_spec,
)
from geometry import ConvexBody, volume
from lab_errors import ConfigError, DimensionMismatchError, LevelSetError, SamplerError


STANDARD_NORMAL_2D = {"family": "gaussian", "dimension": 2, "params": {"mean": [0.0, 0.0]}}


def test_gaussian_peak_and_level_set_volume():
    f = density_from_spec(STANDARD_NORMAL_2D)
    M = 1.0 / (2.0 * math.pi)
    assert f.max_value == pytest.approx(M)
    assert f.value_at([0.0, 0.0]) == pytest.approx(M)
    # L_f(y) is the disk of radius sqrt(2 ln(M/y))
    y = M / math.e
    K = f.level_set(y)
    assert volume(K).value == pytest.approx(2.0 * math.pi)
    assert K.contains([math.sqrt(2.0) - 1e-9, 0.0])
    assert not K.contains([math.sqrt(2.0) + 1e-6, 0.0])


def test_level_set_above_maximum_is_none():
    f = GaussianDensity([0.0], [[1.0]])
    assert f.level_set(f.max_value * 1.01) is None


def test_level_set_at_maximum_is_degenerate_point():
    f = GaussianDensity([1.0, 2.0], np.eye(2))
    K = f.level_set(f.max_value)
    assert K.is_degenerate
    assert K.contains([1.0, 2.0])


def test_nonpositive_level_rejected():
    f = GaussianDensity([0.0], [[1.0]])
    with pytest.raises(LevelSetError):
        f.level_set(0.0)


def test_level_sets_are_nested():
    f = ProductLaplaceDensity([0.0, 0.0], [1.0, 2.0])
    X = np.random.default_rng(0).uniform(-6, 6, size=(5_000, 2))
    low = f.level_set(0.2 * f.max_value).contains_many(X)
    high = f.level_set(0.6 * f.max_value).contains_many(X)
    assert np.all(low[high])
    assert np.count_nonzero(low) > np.count_nonzero(high)


def test_level_set_membership_matches_density():
    f = GaussianDensity([0.5, -0.5], [[2.0, 0.3], [0.3, 1.0]])
    y = 0.3 * f.max_value
    X = f.sample(4_000, seed=1)
    values = f.pdf(X)
    clear = np.abs(values - y) > 1e-9
    assert np.array_equal(f.level_set(y).contains_many(X)[clear], (values >= y)[clear])


def test_simplex_level_set_volume():
    f = ProductExponentialDensity([1.0, 2.0])
    # t = ln(M/y) = 1 gives the simplex with legs 1 and 1/2
    K = f.level_set(f.max_value / math.e)
    assert K.label == "simplex"
    assert K.exact_volume == pytest.approx(0.25)
    assert volume(K).value == pytest.approx(0.25)


def test_cross_polytope_level_set_volume():
    f = ProductLaplaceDensity([0.0, 0.0, 0.0], [1.0, 1.0, 1.0])
    K = f.level_set(f.max_value / math.e)
    assert K.polytope.facet_count == 8
    assert K.exact_volume == pytest.approx(8.0 / 6.0)


def test_uniform_density_is_piecewise_constant():
    f = density_from_spec(
        {"family": "uniform-convex", "dimension": 2, "params": {"body": "box", "lo": [0, 0], "hi": [2, 1]}}
    )
    assert f.is_piecewise_constant
    assert f.max_value == pytest.approx(0.5)
    assert f.level_set(0.1) is f.level_set(0.5)
    assert f.value_at([3.0, 0.5]) == 0.0


def test_uniform_ball_sampler_stays_inside():
    f = UniformConvexDensity(ConvexBody.ball([0.0, 0.0, 0.0], 1.0))
    X, rate = f.sample_with_rate(2_000, seed=4)
    assert X.shape == (2_000, 3)
    assert np.all(f.body.contains_many(X))
    # Ball over its bounding cube is π/6
    assert rate == pytest.approx(math.pi / 6.0, abs=0.05)


def test_samplers_match_means():
    cases = [
        (GaussianDensity([1.0, -2.0], np.eye(2)), [1.0, -2.0]),
        (ProductExponentialDensity([2.0, 0.5]), [0.5, 2.0]),
        (ProductLaplaceDensity([3.0], [1.0]), [3.0]),
    ]
    for f, mean in cases:
        X = f.sample(40_000, seed=2)
        assert np.allclose(X.mean(axis=0), mean, atol=0.05), repr(f)


def test_sampling_is_seed_deterministic():
    f = GaussianDensity([0.0, 0.0], np.eye(2))
    assert np.array_equal(f.sample(100, seed=9), f.sample(100, seed=9))
    assert not np.array_equal(f.sample(100, seed=9), f.sample(100, seed=10))


def test_generic_density_has_no_sampler():
    f = GenericLogConcaveDensity(lambda X: -np.sum(X**2, axis=1), [0.0, 0.0])
    assert not f.has_sampler
    with pytest.raises(SamplerError):
        f.sample(10)
    K = f.level_set(f.max_value / math.e)
    assert K.contains([0.99, 0.0])
    assert not K.contains([1.01, 0.0])


def test_generic_density_checks_the_mode():
    with pytest.raises(ConfigError):
        GenericLogConcaveDensity(lambda X: -np.sum((X - 1.0) ** 2, axis=1), [0.0])


def test_pdf_dimension_mismatch():
    f = GaussianDensity([0.0, 0.0], np.eye(2))
    with pytest.raises(DimensionMismatchError):
        f.value_at([0.0, 0.0, 0.0])


def test_contaminated_mixture_is_not_log_concave():
    spec = dict(STANDARD_NORMAL_2D)
    spec["contamination"] = {
        "weight": 0.1,
        "contaminant": {"family": "gaussian", "dimension": 2, "params": {"mean": [5.0, 5.0]}},
    }
    f = density_from_spec(spec)
    assert isinstance(f, ContaminatedDensity)
    assert not f.is_log_concave
    X = f.sample(20_000, seed=3)
    far = np.mean(np.linalg.norm(X - 5.0, axis=1) < 3.0)
    assert far == pytest.approx(0.1, abs=0.015)
    assert f.value_at([0.0, 0.0]) == pytest.approx(0.9 / (2.0 * math.pi), rel=1e-6)


def test_spec_round_trip_preserves_density():
    for spec in (
        STANDARD_NORMAL_2D,
        {"family": "product-exponential", "dimension": 1, "params": {"rates": [2.0]}},
        {"family": "product-laplace", "dimension": 2, "params": {"loc": [0, 1], "scale": [1, 2]}},
    ):
        f = density_from_spec(spec)
        g = density_from_spec(f.to_spec())
        X = f.sample(50, seed=0)
        assert np.allclose(f.pdf(X), g.pdf(X))


@pytest.mark.parametrize(
    "spec",
    [
        {"family": "poisson", "dimension": 1},
        {"family": "gaussian"},
        {"family": "gaussian", "dimension": 2, "params": {"mean": [0.0]}},
        {"family": "uniform-convex", "dimension": 2, "params": {"body": "torus"}},
        {"family": "gaussian", "dimension": 1, "params": {"cov": [[-1.0]]}},
        {"family": "gaussian", "dimension": 1, "params": {"mean": ["abc"]}},
        {
            "family": "gaussian",
            "dimension": 1,
            "contamination": {"contaminant": {"family": "gaussian", "dimension": 1}},
        },
        {
            "family": "gaussian",
            "dimension": 1,
            "contamination": {
                "weight": "heavy",
                "contaminant": {"family": "gaussian", "dimension": 1},
            },
        },
    ],
)
def test_malformed_specs_raise_config_error(spec):
    with pytest.raises(ConfigError):
        density_from_spec(spec)


def test_bounding_box_holds_almost_all_mass():
    f = ProductLaplaceDensity([0.0], [1.0])
    lo, hi = f.bounding_box(1e-6)
    dist = f.coordinate_distribution(0)
    assert dist.cdf(hi[0]) - dist.cdf(lo[0]) >= 1.0 - 1.01e-6
