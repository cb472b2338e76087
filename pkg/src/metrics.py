#!/usr/bin/env python3
"""
ABOUTME: Distances between densities, set masses and the A-norm over finite set families
ABOUTME: 1-D integrals use breakpoint-split Richardson grids; d >= 2 uses mixture importance sampling
"""

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from densities import EvaluableDensity
from geometry import SetPredicate
from lab_config import (
    DEFAULT_DISTANCE_BUDGET,
    DEFAULT_MC_BUDGET,
    GRID_MAX_CELLS,
    GRID_START_CELLS,
    GRID_TAIL_MASS,
    GRID_TOLERANCE,
    MC_CHUNK_SIZE,
)
from lab_errors import BudgetExhaustedError, ConfigError, DimensionMismatchError
from lab_utils import SeedLike, chunk_sizes, make_rng, run_ordered, spawn_seeds


logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """Uniform measure on n observed samples."""

    samples: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.samples, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.shape[0] < 1:
            raise ConfigError("an empirical distribution needs at least one sample")
        pts.setflags(write=False)
        object.__setattr__(self, "samples", pts)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def dimension(self) -> int:
        return self.samples.shape[1]

    def count_in(self, A: SetPredicate) -> int:
        if A.dimension != self.dimension:
            raise DimensionMismatchError("set and samples differ in dimension")
        return int(np.count_nonzero(A.contains_many(self.samples)))


class IntegralEstimate(NamedTuple):
    """∫_A g with its standard error."""

    value: float
    stderr: float
    method: str  # exact-1d | cdf-1d | sampler | monte-carlo | empirical


class DistanceEstimate(NamedTuple):
    """A distance between densities; for Hellinger `squared` carries h² and its error."""

    value: float
    stderr: float
    method: str  # grid-1d | monte-carlo
    squared: float | None = None
    squared_stderr: float | None = None


class NormEstimate(NamedTuple):
    """Sup over a finite set family of |p(A) - q(A)|."""

    value: float
    stderr: float
    argmax: int


def empirical_measure(e: EmpiricalDistribution, A: SetPredicate) -> float:
    """Fraction of samples lying in A."""
    return e.count_in(A) / e.n


# ---------------------------------------------------------------------------
# Set integrals
# ---------------------------------------------------------------------------


def _is_normalized(g) -> bool:
    return bool(getattr(g, "is_normalized", True))


def _piecewise_interval_mass(g, intervals: Sequence[tuple[float, float]]) -> float:
    """Exact ∫ of a piecewise-constant 1-D density over a union of intervals."""
    cuts = set(g.breakpoints_1d())
    for a, b in intervals:
        for end in (a, b):
            if math.isfinite(end):
                cuts.add(float(end))
    if not cuts:
        return 0.0
    points = np.array(sorted(cuts))
    if points.shape[0] < 2:
        return 0.0
    mids = 0.5 * (points[:-1] + points[1:])
    widths = np.diff(points)
    values = g.pdf(mids[:, None])
    inside = np.zeros(mids.shape[0], dtype=bool)
    for a, b in intervals:
        inside |= (mids >= a) & (mids <= b)
    return float(np.sum(values * widths * inside))


def _cdf_interval_mass(g, intervals: Sequence[tuple[float, float]]) -> float | None:
    """∫ over intervals via closed-form CDFs; None when g has no 1-D CDF."""
    if hasattr(g, "base") and hasattr(g, "contaminant"):
        base = _cdf_interval_mass(g.base, intervals)
        other = _exact_interval_mass(g.contaminant, intervals)
        if base is None or other is None:
            return None
        return (1.0 - g.weight) * base + g.weight * other
    coordinate = getattr(g, "coordinate_distribution", None)
    dist = coordinate(0) if coordinate is not None else None
    if dist is None:
        return None
    total = 0.0
    for a, b in intervals:
        total += float(dist.cdf(b) - dist.cdf(a))
    return total


def _exact_interval_mass(g, intervals) -> float | None:
    if getattr(g, "is_piecewise_constant", False):
        return _piecewise_interval_mass(g, intervals)
    return _cdf_interval_mass(g, intervals)


class MassPool:
    """
    Reusable estimator of set masses g(A) for one density.

    Every set is measured against the same pool of random points (common
    random numbers), so differences between sets share their noise. 1-D
    sets with interval form are integrated exactly when g allows it.
    """

    def __init__(self, g: EvaluableDensity, budget: int = DEFAULT_MC_BUDGET, seed: SeedLike = 0):
        self.g = g
        self.dimension = g.dimension
        self.budget = int(budget)
        self._seed = seed
        self._points: np.ndarray | None = None
        self._weights: np.ndarray | None = None
        self._scale = 1.0
        if g.has_sampler and _is_normalized(g):
            self.mode = "sampler"
        else:
            self.mode = "monte-carlo"

    def _ensure_pool(self) -> None:
        if self._points is not None:
            return
        if self.budget < 1:
            raise BudgetExhaustedError("set-integral budget is empty")
        if self.mode == "sampler":
            self._points = self.g.sample(self.budget, self._seed)
            self._weights = None
        else:
            lo, hi = self.g.bounding_box()
            X = make_rng(self._seed).uniform(lo, hi, size=(self.budget, self.dimension))
            self._points = X
            self._weights = self.g.pdf(X)
            self._scale = float(np.prod(hi - lo))

    def mass(self, A: SetPredicate) -> IntegralEstimate:
        if A.dimension != self.dimension:
            raise DimensionMismatchError("set and density differ in dimension")
        if self.dimension == 1 and A.intervals is not None:
            exact = _exact_interval_mass(self.g, A.intervals)
            if exact is not None:
                method = "exact-1d" if getattr(self.g, "is_piecewise_constant", False) else "cdf-1d"
                return IntegralEstimate(exact, 0.0, method)
        self._ensure_pool()
        inside = A.contains_many(self._points)
        n = self._points.shape[0]
        if self._weights is None:
            p = float(np.count_nonzero(inside)) / n
            return IntegralEstimate(p, math.sqrt(p * (1.0 - p) / n), "sampler")
        terms = self._weights * inside
        mean = float(terms.mean())
        stderr = float(terms.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return IntegralEstimate(self._scale * mean, self._scale * stderr, "monte-carlo")


def set_integral(
    g: EvaluableDensity,
    A: SetPredicate,
    budget: int = DEFAULT_MC_BUDGET,
    seed: SeedLike = 0,
) -> IntegralEstimate:
    """
    ∫_A g.

    Exact in d = 1 when A is a finite union of intervals and g is piecewise
    constant or has a closed-form CDF; otherwise the fraction of g's own
    samples falling in A (normalized samplable densities) or uniform Monte
    Carlo over g's bounding box.
    """
    return MassPool(g, budget, seed).mass(A)


def _measure_fn(p, budget: int, seed: SeedLike) -> Callable[[SetPredicate], IntegralEstimate]:
    if isinstance(p, EmpiricalDistribution):
        return lambda A: IntegralEstimate(empirical_measure(p, A), 0.0, "empirical")
    return MassPool(p, budget, seed).mass


def anorm(
    p,
    q,
    family: Sequence[SetPredicate],
    budget: int = DEFAULT_MC_BUDGET,
    seed: SeedLike = 0,
) -> NormEstimate:
    """
    max over A in the family of |p(A) - q(A)|.

    p and q are densities or EmpiricalDistributions. The same object passed
    twice gives exactly 0.
    """
    sets = list(family)
    if not sets:
        raise ConfigError("A-norm needs a non-empty set family")
    if p is q:
        return NormEstimate(0.0, 0.0, 0)
    seed_p, seed_q = spawn_seeds(seed, 2)
    measure_p = _measure_fn(p, budget, seed_p)
    measure_q = _measure_fn(q, budget, seed_q)
    best = NormEstimate(-1.0, 0.0, 0)
    for index, A in enumerate(sets):
        a, b = measure_p(A), measure_q(A)
        gap = abs(a.value - b.value)
        if gap > best.value:
            best = NormEstimate(gap, math.hypot(a.stderr, b.stderr), index)
    return best


# ---------------------------------------------------------------------------
# Distances
# ---------------------------------------------------------------------------


def _tv_integrand(fx: np.ndarray, gx: np.ndarray) -> np.ndarray:
    return 0.5 * np.abs(fx - gx)


def _l1_integrand(fx: np.ndarray, gx: np.ndarray) -> np.ndarray:
    return np.abs(fx - gx)


def _hellinger_integrand(fx: np.ndarray, gx: np.ndarray) -> np.ndarray:
    return (np.sqrt(fx) - np.sqrt(gx)) ** 2


def _grid_segments(f, g) -> np.ndarray:
    lo_f, hi_f = f.bounding_box(GRID_TAIL_MASS)
    lo_g, hi_g = g.bounding_box(GRID_TAIL_MASS)
    lo = float(min(lo_f[0], lo_g[0]))
    hi = float(max(hi_f[0], hi_g[0]))
    cuts = {lo, hi}
    for bp in list(f.breakpoints_1d()) + list(g.breakpoints_1d()):
        if lo < bp < hi:
            cuts.add(float(bp))
    return np.array(sorted(cuts))


def _midpoint_sum(integrand, f, g, edges: np.ndarray, counts: np.ndarray) -> float:
    total = 0.0
    for a, b, k in zip(edges[:-1], edges[1:], counts, strict=True):
        h = (b - a) / k
        X = (a + h * (np.arange(k) + 0.5))[:, None]
        total += h * float(np.sum(integrand(f.pdf(X), g.pdf(X))))
    return total


def _grid_integral(
    integrand, f, g, max_cells: int, tol: float
) -> tuple[float, float]:
    """
    Midpoint rule on segments split at breakpoints, refined by doubling.

    Richardson extrapolation (4·I_2N - I_N)/3 removes the h² term; stops when
    successive extrapolated values agree to tol. Returns (value, bound) where
    bound covers the last change plus the truncated tails.
    """
    edges = _grid_segments(f, g)
    lengths = np.diff(edges)
    counts = np.maximum(16, np.round(GRID_START_CELLS * lengths / lengths.sum())).astype(int)
    coarse = _midpoint_sum(integrand, f, g, edges, counts)
    previous = None
    while True:
        counts = 2 * counts
        if int(counts.sum()) > max_cells:
            raise BudgetExhaustedError(
                f"grid integration did not reach tolerance {tol:g} within {max_cells} cells"
            )
        fine = _midpoint_sum(integrand, f, g, edges, counts)
        extrapolated = (4.0 * fine - coarse) / 3.0
        if previous is not None and abs(extrapolated - previous) < tol:
            bound = abs(extrapolated - previous) + 2.0 * GRID_TAIL_MASS
            return extrapolated, bound
        previous = extrapolated
        coarse = fine


class _Component(NamedTuple):
    weight: float
    draw: Callable[[int, SeedLike], np.ndarray]
    pdf: Callable[[np.ndarray], np.ndarray]


def _box_component(lo: np.ndarray, hi: np.ndarray, weight: float) -> _Component:
    box_volume = float(np.prod(hi - lo))
    d = lo.shape[0]

    def draw(n: int, seed: SeedLike) -> np.ndarray:
        return make_rng(seed).uniform(lo, hi, size=(n, d))

    def pdf(X: np.ndarray) -> np.ndarray:
        inside = np.all((X >= lo) & (X <= hi), axis=1)
        return inside / box_volume

    return _Component(weight, draw, pdf)


def _proposal(f, g) -> list[_Component]:
    """½ f + ½ g, with a uniform box standing in for any side that cannot be sampled."""
    components = []
    for side in (f, g):
        if side.has_sampler and _is_normalized(side):
            components.append(_Component(0.5, side.sample, side.pdf))
        else:
            lo, hi = side.bounding_box(GRID_TAIL_MASS)
            components.append(_box_component(np.asarray(lo), np.asarray(hi), 0.5))
    return components


def _mixture_integral(integrand, f, g, budget: int, seed: SeedLike) -> tuple[float, float]:
    """
    Stratified importance estimate of ∫ integrand(f, g).

    Each proposal component gets its share of the budget; the estimate is
    Σ_k w_k · mean_{X ~ p_k}[h(X) / q(X)] with q = Σ_k w_k p_k.
    """
    components = _proposal(f, g)
    per_component = max(2, budget // len(components))
    sizes = chunk_sizes(per_component, MC_CHUNK_SIZE)
    seeds = spawn_seeds(seed, len(components) * len(sizes))

    def make_task(component: _Component, size: int, child):
        def task() -> tuple[float, float, int]:
            X = component.draw(size, child)
            q = sum(c.weight * c.pdf(X) for c in components)
            h = integrand(f.pdf(X), g.pdf(X))
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(q > 0, h / q, 0.0)
            return float(ratio.sum()), float((ratio**2).sum()), size

        return task

    tasks = []
    index = 0
    for component in components:
        for size in sizes:
            tasks.append(make_task(component, size, seeds[index]))
            index += 1
    partials = run_ordered(tasks)

    value = 0.0
    variance = 0.0
    for k, component in enumerate(components):
        chunk = partials[k * len(sizes) : (k + 1) * len(sizes)]
        total = sum(c[0] for c in chunk)
        total_sq = sum(c[1] for c in chunk)
        n = sum(c[2] for c in chunk)
        mean = total / n
        var = max(0.0, total_sq / n - mean * mean) * n / max(1, n - 1)
        value += component.weight * mean
        variance += component.weight**2 * var / n
    return value, math.sqrt(variance)


def _check_pair(f, g) -> int:
    if f.dimension != g.dimension:
        raise DimensionMismatchError(
            f"densities live in R^{f.dimension} and R^{g.dimension}"
        )
    return f.dimension


def _resolve_method(d: int, method: str | None) -> str:
    method = method or ("grid-1d" if d == 1 else "monte-carlo")
    if method not in ("grid-1d", "monte-carlo"):
        raise ConfigError(f"unknown distance method {method!r}")
    if method == "grid-1d" and d != 1:
        raise ConfigError("grid-1d integration is only available in d = 1")
    return method


def _integrate_pair(integrand, f, g, method, budget, seed, tol) -> tuple[float, float, str]:
    d = _check_pair(f, g)
    method = _resolve_method(d, method)
    if method == "grid-1d":
        value, bound = _grid_integral(
            integrand, f, g, budget or GRID_MAX_CELLS, tol or GRID_TOLERANCE
        )
        return value, bound, method
    value, stderr = _mixture_integral(integrand, f, g, budget or DEFAULT_DISTANCE_BUDGET, seed)
    if tol is not None and stderr > tol:
        raise BudgetExhaustedError(
            f"monte-carlo stderr {stderr:.2e} exceeds tolerance {tol:.2e}; raise the budget"
        )
    return value, stderr, method


def tv_distance(
    f,
    g,
    method: str | None = None,
    budget: int | None = None,
    seed: SeedLike = 0,
    tol: float | None = None,
) -> DistanceEstimate:
    """
    Total variation distance ½‖f - g‖₁.

    Args:
        f, g: Densities of the same dimension
        method: "grid-1d" (d = 1 default) or "monte-carlo" (d >= 2 default)
        budget: Max grid cells, or total Monte Carlo samples
        seed: Seed for monte-carlo
        tol: Grid agreement tolerance; for monte-carlo the largest acceptable stderr

    Returns:
        DistanceEstimate with a discretization bound (grid) or stderr (MC)
    """
    if f is g:
        return DistanceEstimate(0.0, 0.0, _resolve_method(f.dimension, method))
    value, err, used = _integrate_pair(_tv_integrand, f, g, method, budget, seed, tol)
    return DistanceEstimate(min(1.0, max(0.0, value)), err, used)


def l1_distance(f, g, method=None, budget=None, seed: SeedLike = 0, tol=None) -> DistanceEstimate:
    """‖f - g‖₁; unlike TV this is meaningful for sub-probability g as well."""
    if f is g:
        return DistanceEstimate(0.0, 0.0, _resolve_method(f.dimension, method))
    value, err, used = _integrate_pair(_l1_integrand, f, g, method, budget, seed, tol)
    return DistanceEstimate(max(0.0, value), err, used)


def hellinger(
    f,
    g,
    method: str | None = None,
    budget: int | None = None,
    seed: SeedLike = 0,
    tol: float | None = None,
) -> DistanceEstimate:
    """
    Hellinger distance h with h² = ∫(√f - √g)² (so 0 <= h <= √2).

    The squared value and its error are reported alongside.
    """
    if f is g:
        return DistanceEstimate(0.0, 0.0, _resolve_method(f.dimension, method), 0.0, 0.0)
    h2, err2, used = _integrate_pair(_hellinger_integrand, f, g, method, budget, seed, tol)
    h2 = min(2.0, max(0.0, h2))
    h = math.sqrt(h2)
    # d(√x) = dx / (2√x)
    err = err2 / (2.0 * h) if h > 0 else math.sqrt(err2)
    return DistanceEstimate(h, err, used, h2, err2)


class SandwichCheck(NamedTuple):
    """TV against Hellinger: the chain h² <= TV <= h and the always-valid h²/2 <= TV <= h."""

    tv: DistanceEstimate
    hellinger: DistanceEstimate
    stated_chain_ok: bool
    normalized_chain_ok: bool


def hellinger_tv_sandwich(
    f, g, budget: int | None = None, seed: SeedLike = 0, slack_sigmas: float = 3.0
) -> SandwichCheck:
    """Compute TV and Hellinger for a pair and test both inequality chains within error bars."""
    seed_tv, seed_h = spawn_seeds(seed, 2)
    tv = tv_distance(f, g, budget=budget, seed=seed_tv)
    h = hellinger(f, g, budget=budget, seed=seed_h)
    slack = slack_sigmas * (tv.stderr + h.stderr + (h.squared_stderr or 0.0)) + 1e-9
    upper_ok = tv.value <= h.value + slack
    stated = h.squared <= tv.value + slack and upper_ok
    normalized = 0.5 * h.squared <= tv.value + slack and upper_ok
    return SandwichCheck(tv, h, bool(stated), bool(normalized))


