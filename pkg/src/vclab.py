#!/usr/bin/env python3
"""
ABOUTME: Empirical VC-dimension and growth-function laboratory for set families
ABOUTME: Exact dichotomy enumeration, shattering search, growth counts and the sqrt(V/n) rate check
"""

import itertools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, NamedTuple

import numpy as np

from estimator import yatracos_membership_via_levels
from geometry import Halfspace, Polytope
from lab_config import (
    DEFAULT_SEARCH_BUDGET,
    HALFSPACE_TOLERANCE,
    MAX_GROWTH_CONFIGS,
    MAX_SHATTER_POINTS,
    MAX_VC_K,
)
from lab_errors import BudgetExhaustedError, ConfigError
from lab_utils import SeedLike, loglog_fit, make_rng, run_ordered, spawn_seeds
from structure import Level, PiecewisePolytopeDensity


logger = logging.getLogger(__name__)

FAMILY_KINDS = ("intervals-1d", "halfspaces", "finite-list", "piecewise-difference")

# Deterministic search grids per dimension (points per axis)
GRID_POINTS_PER_AXIS = {1: 8, 2: 4, 3: 3}

Labeling = tuple[bool, ...]


@dataclass(frozen=True, eq=False)
class SetFamilyHandle:
    """
    A family of subsets of R^d.

    params by kind:
        intervals-1d: none
        halfspaces: {"dimension": d}
        finite-list: {"sets": [SetPredicate, ...]}
        piecewise-difference: {"pairs": [(g, g'), ...]} of piecewise-polytope
            densities, optionally with "L", "H" recorded for growth bounds
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ConfigError(f"unknown set family kind {self.kind!r}")
        if self.kind == "halfspaces" and int(self.params.get("dimension", 0)) < 1:
            raise ConfigError("halfspace families need a positive 'dimension'")
        if self.kind == "finite-list" and not self.params.get("sets"):
            raise ConfigError("finite-list families need a non-empty 'sets' list")
        if self.kind == "piecewise-difference" and not self.params.get("pairs"):
            raise ConfigError("piecewise-difference families need a non-empty 'pairs' list")

    @property
    def dimension(self) -> int:
        if self.kind == "intervals-1d":
            return 1
        if self.kind == "halfspaces":
            return int(self.params["dimension"])
        if self.kind == "finite-list":
            return self.params["sets"][0].dimension
        return self.params["pairs"][0][0].dimension

    @property
    def has_exact_enumerator(self) -> bool:
        return self.kind != "halfspaces" or self.dimension <= 2

    def dichotomies(self, points) -> set[Labeling]:
        """Every labeling of the points the family achieves."""
        pts = _as_point_array(points, self.dimension)
        if not self.has_exact_enumerator:
            raise ConfigError(f"{self.describe()} has no exact dichotomy enumerator")
        if pts.shape[0] == 0:
            return {()}
        if self.kind == "intervals-1d":
            return _interval_labelings(pts[:, 0])
        if self.kind == "halfspaces":
            if self.dimension == 1:
                return _halfline_labelings(pts[:, 0])
            return _halfplane_labelings(pts)
        if self.kind == "finite-list":
            return {tuple(bool(v) for v in A.contains_many(pts)) for A in self.params["sets"]}
        return {
            tuple(bool(v) for v in yatracos_membership_via_levels(g, g_other, pts))
            for g, g_other in self.params["pairs"]
        }

    def describe(self) -> str:
        if self.kind == "halfspaces":
            return f"halfspaces(d={self.dimension})"
        if self.kind == "finite-list":
            return f"finite-list({len(self.params['sets'])} sets)"
        if self.kind == "piecewise-difference":
            return f"piecewise-difference({len(self.params['pairs'])} pairs)"
        return self.kind

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "description": self.describe(),
            "dimension": self.dimension,
            "exact_enumerator": self.has_exact_enumerator,
        }


def _as_point_array(points, d: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return np.zeros((0, d))
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1) if d == 1 else pts.reshape(1, -1)
    if pts.shape[1] != d:
        raise ConfigError(f"points in R^{pts.shape[1]} for a family in R^{d}")
    return pts


# ---------------------------------------------------------------------------
# Exact enumerators
# ---------------------------------------------------------------------------


def _value_groups(x: np.ndarray) -> list[list[int]]:
    """Point indices grouped by equal coordinate, groups in increasing order."""
    order = np.argsort(x, kind="stable")
    groups: list[list[int]] = []
    for idx in order:
        if groups and x[groups[-1][0]] == x[idx]:
            groups[-1].append(int(idx))
        else:
            groups.append([int(idx)])
    return groups


def _labeling(n: int, members) -> Labeling:
    mask = [False] * n
    for k in members:
        mask[k] = True
    return tuple(mask)


def _interval_labelings(x: np.ndarray) -> set[Labeling]:
    """Intervals pick out contiguous runs of the sorted distinct values."""
    n = x.shape[0]
    groups = _value_groups(x)
    result = {_labeling(n, [])}
    for a in range(len(groups)):
        for b in range(a, len(groups)):
            result.add(_labeling(n, [k for g in groups[a : b + 1] for k in g]))
    return result


def _halfline_labelings(x: np.ndarray) -> set[Labeling]:
    """{x <= t} and {x >= t}: prefixes and suffixes of the sorted values."""
    n = x.shape[0]
    groups = _value_groups(x)
    result = set()
    for cut in range(len(groups) + 1):
        prefix = [k for g in groups[:cut] for k in g]
        suffix = [k for g in groups[cut:] for k in g]
        result.add(_labeling(n, prefix))
        result.add(_labeling(n, suffix))
    return result


def _halfplane_labelings(pts: np.ndarray) -> set[Labeling]:
    """
    Labelings cut out by closed halfplanes in R^2.

    Every separating line can be moved until it passes through two points;
    a slight turn then splits the points on that line into a prefix and a
    suffix along it. Lines through pairs, both orientations, plus the two
    trivial labelings cover all achievable dichotomies.
    """
    n = pts.shape[0]
    result = {_labeling(n, []), _labeling(n, range(n))}
    if n == 1:
        return result
    scale = max(1.0, float(np.abs(pts).max()))
    for i, j in itertools.combinations(range(n), 2):
        direction = pts[j] - pts[i]
        if not np.any(direction):
            continue
        normal = np.array([-direction[1], direction[0]])
        for sign in (1.0, -1.0):
            s = sign * (pts - pts[i]) @ normal
            tol = HALFSPACE_TOLERANCE * scale * float(np.linalg.norm(normal))
            above = [int(k) for k in np.flatnonzero(s > tol)]
            on_line = np.flatnonzero(np.abs(s) <= tol)
            along = on_line[np.argsort(pts[on_line] @ direction, kind="stable")]
            for cut in range(len(along) + 1):
                result.add(_labeling(n, above + [int(k) for k in along[:cut]]))
                result.add(_labeling(n, above + [int(k) for k in along[cut:]]))
    return result


def _random_halfspace_labelings(
    pts: np.ndarray, directions: int, rng: np.random.Generator
) -> set[Labeling]:
    """Lower-bound labelings of halfspaces in any dimension: all thresholds along random normals."""
    n, d = pts.shape
    result = {_labeling(n, []), _labeling(n, range(n))}
    normals = rng.normal(size=(directions, d))
    for normal in normals:
        projections = pts @ normal
        for labeling in _halfline_labelings(projections):
            result.add(labeling)
    return result


# ---------------------------------------------------------------------------
# Shattering
# ---------------------------------------------------------------------------


class ShatterCheck(NamedTuple):
    shattered: bool
    count: int
    needed: int


def shatters(family: SetFamilyHandle, points) -> ShatterCheck:
    """Count distinct labelings; the points are shattered when all 2^k appear."""
    pts = _as_point_array(points, family.dimension)
    if pts.shape[0] > MAX_SHATTER_POINTS:
        raise ConfigError(
            f"exact shattering checks take at most {MAX_SHATTER_POINTS} points, got {pts.shape[0]}"
        )
    count = len(family.dichotomies(pts))
    needed = 2 ** pts.shape[0]
    return ShatterCheck(count == needed, count, needed)


@dataclass
class ShatterReport:
    """Largest shattered point set found by a search."""

    family: SetFamilyHandle
    shattered_size: int
    witness_points: list[list[float]]
    exhaustive: bool
    point_sets_checked: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "family": self.family.to_dict(),
            "shattered_size": self.shattered_size,
            "witness_points": self.witness_points,
            "exhaustive": self.exhaustive,
            "point_sets_checked": self.point_sets_checked,
        }


def search_grid(d: int, domain_box=None) -> np.ndarray:
    """Deterministic point grid of a search: 8 points on a line, a 4×4 or 3×3×3 lattice."""
    if d not in GRID_POINTS_PER_AXIS:
        raise ConfigError(f"no deterministic search grid for d={d}")
    lo, hi = (np.zeros(d), np.ones(d)) if domain_box is None else domain_box
    lo = np.asarray(lo, dtype=float).reshape(d)
    hi = np.asarray(hi, dtype=float).reshape(d)
    axes = [np.linspace(lo[k], hi[k], GRID_POINTS_PER_AXIS[d]) for k in range(d)]
    return np.array(np.meshgrid(*axes, indexing="ij")).reshape(d, -1).T


def vc_estimate(
    family: SetFamilyHandle,
    domain_box=None,
    k_max: int = MAX_VC_K,
    search_budget: int = DEFAULT_SEARCH_BUDGET,
    seed: SeedLike = 0,
) -> ShatterReport:
    """
    Largest k such that some k points are shattered.

    Families with an exact enumerator are searched exhaustively over the
    deterministic grid: once no k-subset is shattered, no larger one is
    either. Other families get a randomized lower bound from search_budget
    random point sets per size.
    """
    if not 1 <= k_max <= MAX_VC_K:
        raise ConfigError(f"k_max must lie in [1, {MAX_VC_K}], got {k_max}")
    d = family.dimension
    if family.has_exact_enumerator:
        grid = search_grid(d, domain_box)
        best: list[list[float]] = []
        checked = 0
        for k in range(1, min(k_max, grid.shape[0]) + 1):
            witness = None
            for combo in itertools.combinations(range(grid.shape[0]), k):
                checked += 1
                if shatters(family, grid[list(combo)]).shattered:
                    witness = grid[list(combo)]
                    break
            if witness is None:
                logger.debug("%s: no %d-subset of the grid is shattered", family.describe(), k)
                return ShatterReport(family, k - 1, best, True, checked)
            best = witness.tolist()
        return ShatterReport(family, len(best), best, False, checked)

    lo, hi = (np.zeros(d), np.ones(d)) if domain_box is None else domain_box
    rng = make_rng(seed)
    best = []
    checked = 0
    for k in range(1, k_max + 1):
        witness = None
        for _ in range(search_budget):
            checked += 1
            pts = rng.uniform(lo, hi, size=(k, d))
            labelings = _random_halfspace_labelings(pts, 4 * 2**k, rng)
            if len(labelings) == 2**k:
                witness = pts
                break
        if witness is None:
            break
        best = witness.tolist()
    if not best:
        raise BudgetExhaustedError(f"{family.describe()}: no shattered set within the budget")
    return ShatterReport(family, len(best), best, False, checked)


# ---------------------------------------------------------------------------
# Growth counting on toy piecewise-polytope classes
# ---------------------------------------------------------------------------


def growth_bound(L: int, H: int, d: int, n: int, constant: float = 1.0) -> float:
    """(2L)!·(c·n)^(2dLH)."""
    return math.factorial(2 * L) * (constant * n) ** (2 * d * L * H)


def vc_dimension_bound(d: int, epsilon: float, constant: float = 1.0) -> float:
    """constant·(d/ε)^((d+1)/2)·ln²(1/ε)."""
    return constant * (d / epsilon) ** ((d + 1) / 2) * math.log(1.0 / epsilon) ** 2


def _toy_polytopes(d: int, H: int, offsets: Sequence[float], normals: int) -> list[Polytope]:
    if d == 1:
        halfspaces = [Halfspace(np.array([s]), s * t) for t in offsets for s in (1.0, -1.0)]
    else:
        angles = np.arange(normals) * (2.0 * math.pi / normals)
        halfspaces = [
            Halfspace(np.array([math.cos(a), math.sin(a)]), float(t))
            for a in angles
            for t in offsets
        ]
    polytopes = []
    for combo in itertools.combinations(halfspaces, H):
        P = Polytope(tuple(combo), d)
        polytopes.append(P)
    return polytopes


def toy_piecewise_grid(
    d: int,
    L: int,
    H: int,
    offsets: Sequence[float] = (0.25, 0.5, 0.75),
    heights: Sequence[float] = (3.0, 2.0, 1.0),
    normals: int = 3,
) -> list[PiecewisePolytopeDensity]:
    """
    Finite grid of small piecewise-polytope densities.

    Each member has L levels with heights drawn from `heights` and level
    polytopes cut by H halfspaces from a fixed menu (half-lines at the
    offsets in d = 1, halfplanes with `normals` equally spaced normals at
    the offsets in d = 2). Polytopes may be unbounded; only membership is
    used.
    """
    if not (1 <= L <= 3 and 1 <= H <= 3 and 1 <= d <= 2):
        raise ConfigError(f"toy grids need L <= 3, H <= 3, d <= 2; got L={L}, H={H}, d={d}")
    polytopes = _toy_polytopes(d, H, offsets, normals)
    ladders = list(itertools.combinations(sorted(set(heights), reverse=True), L))
    total = len(ladders) * len(polytopes) ** L
    if total**2 > MAX_GROWTH_CONFIGS:
        raise BudgetExhaustedError(
            f"toy grid has {total} members ({total**2} pairs), cap is {MAX_GROWTH_CONFIGS} pairs"
        )
    members = []
    for ys in ladders:
        for chosen in itertools.product(polytopes, repeat=L):
            members.append(
                PiecewisePolytopeDensity(
                    levels=tuple(Level(y, P) for y, P in zip(ys, chosen, strict=True)),
                    epsilon=0.5,
                    dimension=d,
                )
            )
    return members


def difference_family(
    members: Sequence[PiecewisePolytopeDensity], L: int | None = None, H: int | None = None
) -> SetFamilyHandle:
    """All difference sets {g >= g'} over ordered pairs of members (g = g' included)."""
    pairs = [(g, g_other) for g in members for g_other in members]
    if len(pairs) > MAX_GROWTH_CONFIGS:
        raise BudgetExhaustedError(
            f"{len(pairs)} member pairs exceed the cap of {MAX_GROWTH_CONFIGS}"
        )
    params: dict[str, Any] = {"pairs": pairs}
    if L is not None and H is not None:
        params.update(L=L, H=H)
    return SetFamilyHandle("piecewise-difference", params)


class GrowthReport(NamedTuple):
    count: int
    n: int
    power_bound: int
    formula_bound: float | None
    fitted_constant: float | None
    within_power_bound: bool

    def to_dict(self) -> dict[str, Any]:
        return self._asdict()


def growth_count(family: SetFamilyHandle, points, constant: float = 1.0) -> GrowthReport:
    """
    Distinct intersections of the family with a point set.

    For difference families with recorded (L, H) the count is compared with
    (2L)!·(c·n)^(2dLH); fitted_constant is the smallest c that satisfies it.
    """
    pts = _as_point_array(points, family.dimension)
    n = pts.shape[0]
    if family.kind == "piecewise-difference":
        L = family.params.get("L")
        H = family.params.get("H")
        if family.dimension > 2 or n > 12 or (L is not None and L > 3) or (H is not None and H > 3):
            raise ConfigError("growth counting runs at toy scale: d <= 2, L <= 3, H <= 3, n <= 12")
    count = len(family.dichotomies(pts))
    formula = fitted = None
    if family.kind == "piecewise-difference" and "L" in family.params and n > 0:
        L, H, d = family.params["L"], family.params["H"], family.dimension
        formula = growth_bound(L, H, d, n, constant)
        exponent = 2 * d * L * H
        fitted = (count / math.factorial(2 * L)) ** (1.0 / exponent) / n
    return GrowthReport(count, n, 2**n, formula, fitted, count <= 2**n)


# ---------------------------------------------------------------------------
# Interval discrepancy and the sqrt(V/n) rate
# ---------------------------------------------------------------------------


def interval_sup_statistic(samples, cdf) -> float:
    """
    sup over intervals A of |F(A) - F_n(A)| for a continuous CDF F.

    Equals max(F_n - F) - min(F_n - F), read off the sorted sample in
    O(n log n).
    """
    x = np.sort(np.asarray(samples, dtype=float).reshape(-1))
    n = x.shape[0]
    if n == 0:
        raise ConfigError("interval statistic needs at least one sample")
    F = np.asarray(cdf(x), dtype=float)
    ranks = np.arange(1, n + 1)
    above = float(np.max(ranks / n - F))
    below = float(np.max(F - (ranks - 1) / n))
    return max(above, 0.0) + max(below, 0.0)


def interval_sup_bruteforce(samples, cdf) -> float:
    """Same statistic by enumerating closed and open intervals between sample points, O(n²)."""
    x = np.sort(np.asarray(samples, dtype=float).reshape(-1))
    n = x.shape[0]
    F = np.asarray(cdf(x), dtype=float)
    best = 0.0
    for i in range(n):
        for j in range(i, n):
            closed = abs((j - i + 1) / n - (F[j] - F[i]))
            best = max(best, closed)
            if j > i:
                best = max(best, abs((j - i - 1) / n - (F[j] - F[i])))
    return best


class RateReport(NamedTuple):
    """Mean interval discrepancy per sample size with its log-log fit."""

    n_grid: list[int]
    means: list[float]
    stderrs: list[float]
    slope: float
    intercept: float
    fitted_constant: float
    V: int

    def to_dict(self) -> dict[str, Any]:
        return self._asdict()


def vc_rate_experiment(
    f, n_grid: Sequence[int], reps: int, seed: SeedLike = 0, V: int = 2
) -> RateReport:
    """
    E sup_A |f(A) - f̂_n(A)| over intervals, against n.

    The fitted constant is C in mean ≈ C·sqrt(V/n), averaged over the grid.
    """
    if f.dimension != 1:
        raise ConfigError("the interval rate experiment runs in d = 1")
    marginal = f.coordinate_distribution(0)
    if marginal is None:
        raise ConfigError(f"{f!r} has no closed-form CDF")
    if reps < 1 or not n_grid:
        raise ConfigError("rate experiment needs reps >= 1 and a non-empty n grid")
    grid = [int(n) for n in n_grid]
    seeds = spawn_seeds(seed, len(grid) * reps)

    def make_task(n: int, child):
        return lambda: interval_sup_statistic(f.sample(n, child)[:, 0], marginal.cdf)

    tasks = [make_task(n, seeds[k * reps + r]) for k, n in enumerate(grid) for r in range(reps)]
    values = np.array(run_ordered(tasks)).reshape(len(grid), reps)
    means = values.mean(axis=1)
    stderrs = values.std(axis=1, ddof=1) / math.sqrt(reps) if reps > 1 else np.zeros(len(grid))
    slope, intercept = loglog_fit(grid, means)
    constant = float(np.mean(means * np.sqrt(np.array(grid) / V)))
    logger.info("interval rate: slope %.3f over n in %s", slope, grid)
    return RateReport(grid, means.tolist(), stderrs.tolist(), slope, intercept, constant, V)
