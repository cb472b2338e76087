#!/usr/bin/env python3
"""
ABOUTME: Tests for class parameters, the level ladder and piecewise-polytope approximations
ABOUTME: Checks dual evaluation, domination g <= f, volume sandwiches, tails and integrals
"""

import math
import unittest

import numpy as np
import pytest

from densities import ContaminatedDensity, GaussianDensity, density_from_spec
from geometry import Polytope
from lab_config import APPROX_RUN_C_H
from lab_errors import ConfigError, DimensionMismatchError, LevelSetError, SamplerError
from structure import (
    ApproxConfig,
    Level,
    PiecewisePolytopeDensity,
    approximation_error,
    build_approximation,
    class_params,
    concentration_profile,
    delta_check,
    delta_threshold,
    domination_violations,
    eval_piecewise,
    eval_piecewise_min_index,
    integral_of_g,
    ladder,
    level_set_of_g,
    min_c_L_for_delta,
    tail_mass,
    volume_sandwich_check,
)


def interval(lo: float, hi: float) -> Polytope:
    return Polytope.from_points([[lo], [hi]])


def two_step_density() -> PiecewisePolytopeDensity:
    """Height 2 on [0, 1] and height 1 on [-1, 2]."""
    return PiecewisePolytopeDensity(
        levels=(Level(2.0, interval(0.0, 1.0)), Level(1.0, interval(-1.0, 2.0))),
        epsilon=0.5,
        dimension=1,
    )


@pytest.mark.parametrize(
    "d, eps, c_H, expected",
    [
        (1, 0.1, 1.0, (48, 1)),
        (2, 0.2, 1.0, (19, 4)),
        (2, 0.2, 4.0, (19, 7)),
        (3, 0.5, 1.0, (10, 6)),
    ],
)
def test_class_params(d, eps, c_H, expected):
    assert tuple(class_params(d, eps, c_H=c_H)) == expected


def test_class_params_reject_bad_epsilon():
    with pytest.raises(ConfigError):
        class_params(2, 0.7)
    with pytest.raises(ConfigError):
        class_params(0, 0.1)


def test_ladder_is_geometric():
    assert ladder(1.0, 0.5, 3) == pytest.approx([0.5, 0.25, 0.125])
    values = ladder(0.3, 0.1, 40)
    assert all(a > b for a, b in zip(values, values[1:], strict=False))


@pytest.mark.parametrize("M, eps, L", [(0.0, 0.1, 3), (1.0, 1.0, 3), (1.0, 0.1, 0)])
def test_ladder_rejects_bad_input(M, eps, L):
    with pytest.raises(ConfigError):
        ladder(M, eps, L)


def test_delta_threshold_and_check():
    assert delta_threshold(1, 0.1) == pytest.approx(0.0025)
    # With the default c_L the second-lowest ladder value stays above δ·M_f
    report = delta_check(1, ApproxConfig(0.1))
    assert report.L == 48
    assert not report.holds
    c_L = min_c_L_for_delta(1, 0.1)
    assert c_L > 2.0
    assert delta_check(1, ApproxConfig(0.1, c_L=c_L)).holds


def test_approx_config_validation():
    with pytest.raises(ConfigError):
        ApproxConfig(0.6)
    with pytest.raises(ConfigError):
        ApproxConfig(0.1, c_L=0.5)
    with pytest.raises(ConfigError):
        ApproxConfig(0.1, mc_budget=0)


def test_max_rule_evaluation():
    g = two_step_density()
    assert eval_piecewise(g, [0.5]) == 2.0
    assert eval_piecewise(g, [1.5]) == 1.0
    assert eval_piecewise(g, [3.0]) == 0.0
    # Boundaries are closed
    assert eval_piecewise(g, [1.0]) == 2.0


def test_first_index_rule_agrees_with_max_rule():
    g = two_step_density()
    X = np.linspace(-2.0, 3.0, 501)[:, None]
    assert np.array_equal(g.pdf(X), g.pdf_min_index(X))
    assert eval_piecewise_min_index(g, [-0.5]) == 1.0


def test_evaluation_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        eval_piecewise(two_step_density(), [0.0, 0.0])


def test_heights_must_decrease():
    with pytest.raises(ConfigError):
        PiecewisePolytopeDensity(
            levels=(Level(1.0, interval(0.0, 1.0)), Level(2.0, interval(-1.0, 2.0))),
            epsilon=0.5,
            dimension=1,
        )


def test_facet_budget_is_enforced():
    square = Polytope.box([0.0, 0.0], [1.0, 1.0])
    with pytest.raises(ConfigError):
        PiecewisePolytopeDensity(levels=(Level(1.0, square),), epsilon=0.5, dimension=2, facet_budget=3)


def test_level_sets_of_g():
    g = two_step_density()
    assert level_set_of_g(g, 1.5).intervals == ((0.0, 1.0),)
    assert level_set_of_g(g, 0.5).intervals == ((-1.0, 2.0),)
    assert level_set_of_g(g, 3.0).intervals == ()
    with pytest.raises(LevelSetError):
        level_set_of_g(g, 0.0)


def test_integral_and_normalization_in_one_dimension():
    g = two_step_density()
    total = integral_of_g(g)
    assert total.value == pytest.approx(4.0)
    assert total.stderr == 0.0
    h = g.normalized()
    assert h.is_normalized
    assert np.allclose(h.heights, [0.5, 0.25])
    assert integral_of_g(h).value == pytest.approx(1.0)


def test_piecewise_density_has_no_sampler():
    with pytest.raises(SamplerError):
        two_step_density().sample(10)


def test_json_round_trip_keeps_values():
    g = two_step_density()
    h = PiecewisePolytopeDensity.from_json(g.to_json())
    X = np.linspace(-2.0, 3.0, 101)[:, None]
    assert np.array_equal(g.pdf(X), h.pdf(X))
    assert h.epsilon == g.epsilon


def test_uniform_body_collapses_to_one_level():
    f = density_from_spec(
        {"family": "uniform-convex", "dimension": 2, "params": {"body": "box", "lo": [0, 0], "hi": [2, 1]}}
    )
    g = build_approximation(f, ApproxConfig(0.2), seed=0)
    assert g.level_count == 1
    assert g.diagnostics["plateau"]
    assert g.heights[0] == pytest.approx(0.5)
    X = np.random.default_rng(0).uniform(-1.0, 3.0, size=(2_000, 2))
    assert np.allclose(g.pdf(X), f.pdf(X))
    assert integral_of_g(g).value == pytest.approx(1.0)


def test_refuses_contaminated_and_high_dimensional_inputs():
    base = GaussianDensity([0.0], [[1.0]])
    mixture = ContaminatedDensity(base, GaussianDensity([3.0], [[1.0]]), 0.1)
    with pytest.raises(ConfigError):
        build_approximation(mixture, ApproxConfig(0.2))
    with pytest.raises(ConfigError):
        build_approximation(GaussianDensity(np.zeros(4), np.eye(4)), ApproxConfig(0.2))
    with pytest.raises(ConfigError):
        build_approximation(GaussianDensity(np.zeros(2), np.eye(2)), ApproxConfig(0.2, max_facets=2))


def test_one_dimensional_gaussian_approximation():
    f = GaussianDensity([0.0], [[1.0]])
    g = build_approximation(f, ApproxConfig(0.2), seed=1)
    assert not g.diagnostics["plateau"]
    assert g.level_count == 18
    assert domination_violations(f, g, 20_000, seed=2) == 0
    # g <= f, so ‖f - g‖₁ = 1 - ∫g
    error = approximation_error(f, g)
    assert error.value + integral_of_g(g).value == pytest.approx(1.0, abs=1e-5)
    assert error.value < 0.2


def test_error_shrinks_with_epsilon():
    f = GaussianDensity([0.0], [[1.0]])
    coarse = approximation_error(f, build_approximation(f, ApproxConfig(0.4), seed=0))
    fine = approximation_error(f, build_approximation(f, ApproxConfig(0.1), seed=0))
    assert fine.value < coarse.value


def test_tail_mass_of_standard_normal_is_linear_in_y():
    f = GaussianDensity([0.0, 0.0], np.eye(2))
    y = 0.05 * f.max_value
    estimate = tail_mass(f, y, budget=100_000, seed=3)
    assert abs(estimate.value - 0.05) < 4.0 * estimate.stderr
    with pytest.raises(LevelSetError):
        tail_mass(f, 2.0 * f.max_value)


def test_concentration_profile_for_gaussian():
    report = concentration_profile(GaussianDensity([0.0, 0.0], np.eye(2)))
    assert report.core_volume == pytest.approx(2.0 * math.pi)
    assert report.core_holds
    assert all(row.holds for row in report.rows)


class TestPlanarGaussianApproximation(unittest.TestCase):
    """One ε = 0.2 approximation of N(0, I₂) with room for hexagons."""

    @classmethod
    def setUpClass(cls):
        cls.f = GaussianDensity([0.0, 0.0], np.eye(2))
        cls.config = ApproxConfig(0.2, c_H=4.0)
        cls.g = build_approximation(cls.f, cls.config, seed=7)

    def test_levels_respect_the_facet_budget(self):
        self.assertEqual(self.g.diagnostics["H"], 7)
        for level in self.g.levels:
            self.assertLessEqual(level.polytope.facet_count, 7)
        self.assertEqual(self.g.diagnostics["over_budget_levels"], 0)
        self.assertLessEqual(self.g.diagnostics["max_deficit"], 0.2)
        print(f"✓ {self.g.level_count} levels, max deficit {self.g.diagnostics['max_deficit']:.4f}")

    def test_ladder_matches_class_params(self):
        self.assertEqual(len(self.g.ladder_values), self.g.diagnostics["L"])
        self.assertAlmostEqual(self.g.ladder_values[0], 0.8 * self.f.max_value)

    def test_g_is_dominated_by_f(self):
        self.assertEqual(domination_violations(self.f, self.g, 50_000, seed=1), 0)

    def test_dual_evaluation_agrees(self):
        X = self.f.sample(5_000, seed=2)
        self.assertTrue(np.array_equal(self.g.pdf(X), self.g.pdf_min_index(X)))

    def test_volume_sandwich_holds_across_the_ladder(self):
        low, high = self.g.ladder_range
        for y in np.geomspace(low, high, 9):
            report = volume_sandwich_check(self.f, self.g, float(y), seed=3)
            self.assertTrue(report.passed, f"sandwich failed at y={y:.4g}: {report}")

    def test_sandwich_refuses_levels_outside_the_ladder(self):
        with self.assertRaises(LevelSetError):
            volume_sandwich_check(self.f, self.g, 2.0 * self.f.max_value)

    def test_layer_cake_integral_matches_l1_error(self):
        mass = integral_of_g(self.g)
        self.assertEqual(mass.method, "layer-cake")
        error = approximation_error(self.f, self.g, budget=400_000, seed=4)
        self.assertLess(abs(mass.value + error.value - 1.0), 4.0 * error.stderr + 1e-3)
        self.assertGreater(mass.value, 0.5)


def planar_gaussian_l1(eps: float, L: int, m: int) -> float:
    """
    Exact ‖f - g‖₁ for N(0, I₂) when every level is the regular m-gon inscribed in its disk.

    Level i has radius² 2·i·ln(1/(1-ε)), so the layer-cake sum telescopes to
    ∫g = ρ_m·a·q(1 - q^L)/ε with q = 1 - ε, a = -ln q and ρ_m the area
    fraction of the m-gon in its circle.
    """
    q = 1.0 - eps
    a = -math.log(q)
    rho = m * math.sin(2.0 * math.pi / m) / (2.0 * math.pi)
    return 1.0 - rho * a * q * (1.0 - q**L) / eps


# Largest l1/eps over eps in {0.4, 0.2, 0.1} for N(0, I₂) at c_L = 2, c_H = 4;
# dev/calibrate_l1.py measures the same ratio
L1_CONSTANT = 1.512

# Fewest polygon sides with area deficit <= eps at each eps
PLANAR_SIDES = {0.4: 4, 0.2: 6, 0.1: 8}


def planar_gaussian_approximation(eps: float, seed: int = 11) -> PiecewisePolytopeDensity:
    f = GaussianDensity([0.0, 0.0], np.eye(2))
    return build_approximation(f, ApproxConfig(eps, c_L=2.0, c_H=APPROX_RUN_C_H), seed=seed)


@pytest.mark.parametrize("eps", [0.4, 0.2, 0.1])
def test_planar_gaussian_error_is_within_the_frozen_constant(eps):
    g = planar_gaussian_approximation(eps)
    sides = PLANAR_SIDES[eps]
    assert g.diagnostics["over_budget_levels"] == 0
    assert [level.polytope.facet_count for level in g.levels] == [sides] * g.diagnostics["L"]
    mass = integral_of_g(g)
    assert mass.method == "layer-cake"
    l1 = 1.0 - mass.value
    assert l1 == pytest.approx(planar_gaussian_l1(eps, g.diagnostics["L"], sides), abs=1e-6)
    assert l1 <= 1.1 * L1_CONSTANT * eps
    assert mass.value >= (1.0 - eps) ** 3


def test_planar_gaussian_error_falls_with_epsilon():
    errors = [1.0 - integral_of_g(planar_gaussian_approximation(eps)).value for eps in (0.4, 0.2, 0.1)]
    assert errors[0] > errors[1] > errors[2]


def test_approx_run_facet_budget_fits_octagons():
    g = planar_gaussian_approximation(0.1)
    assert g.diagnostics["H"] == 9
    assert g.diagnostics["max_deficit"] <= 0.1
    # c_H = 1 caps levels at pentagons, whose deficit is about 0.24
    capped = build_approximation(GaussianDensity([0.0, 0.0], np.eye(2)), ApproxConfig(0.1), seed=11)
    assert capped.diagnostics["H"] == 5
    assert capped.diagnostics["over_budget_levels"] == capped.diagnostics["L"]


@pytest.mark.slow
@pytest.mark.parametrize("eps", [0.4, 0.2, 0.1])
def test_planar_gaussian_error_by_monte_carlo(eps):
    f = GaussianDensity([0.0, 0.0], np.eye(2))
    g = planar_gaussian_approximation(eps)
    assert domination_violations(f, g, 100_000, seed=12) == 0
    error = approximation_error(f, g, seed=13)
    predicted = planar_gaussian_l1(eps, g.diagnostics["L"], PLANAR_SIDES[eps])
    assert abs(error.value - predicted) <= 0.1 * predicted + 3.0 * error.stderr
    assert error.value <= 1.1 * L1_CONSTANT * eps + 3.0 * error.stderr
