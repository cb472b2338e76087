#!/usr/bin/env python3
"""
ABOUTME: Minimum-distance selection over finite candidate classes of densities
ABOUTME: Pairwise difference sets, level-ordering membership, sample sizes and the 3·OPT + ε harness
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, NamedTuple

import numpy as np
from scipy.optimize import brentq

from geometry import SetPredicate, intervals_set
from lab_config import (
    DEFAULT_INTEGRAL_BUDGET,
    DEFAULT_SAMPLE_CONSTANT,
    GRID_TAIL_MASS,
    YATRACOS_GRID_CELLS,
    ceil_guarded,
)
from lab_errors import ConfigError, DimensionMismatchError, SelectionError
from lab_utils import SeedLike, as_seed_sequence, run_ordered, spawn_seeds
from metrics import (
    EmpiricalDistribution,
    MassPool,
    anorm,
    empirical_measure,
    tv_distance,
)
from structure import ApproxConfig, PiecewisePolytopeDensity, build_approximation


logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CandidateClass:
    """Finite, ordered list of candidate densities sharing one dimension."""

    members: tuple
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise SelectionError("candidate class is empty")
        d = members[0].dimension
        for g in members[1:]:
            if g.dimension != d:
                raise DimensionMismatchError("candidate densities differ in dimension")
        labels = tuple(self.labels) or tuple(f"g{i}" for i in range(len(members)))
        if len(labels) != len(members):
            raise ConfigError("one label per candidate is required")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "labels", labels)

    @property
    def dimension(self) -> int:
        return self.members[0].dimension

    def __len__(self) -> int:
        return len(self.members)

    def __getitem__(self, index: int):
        return self.members[index]

    def permuted(self, order: Sequence[int]) -> "CandidateClass":
        if sorted(order) != list(range(len(self))):
            raise ConfigError(f"{list(order)} is not a permutation of the class indices")
        return CandidateClass(
            tuple(self.members[k] for k in order), tuple(self.labels[k] for k in order)
        )


@dataclass(frozen=True, eq=False)
class YatracosSet:
    """{x : g_i(x) >= g_j(x)} for an ordered pair of candidates."""

    i: int
    j: int
    predicate: SetPredicate

    @property
    def dimension(self) -> int:
        return self.predicate.dimension

    @property
    def intervals(self):
        return self.predicate.intervals

    def contains(self, x) -> bool:
        return self.predicate.contains(x)

    def contains_many(self, X) -> np.ndarray:
        return self.predicate.contains_many(X)


# ---------------------------------------------------------------------------
# Difference sets
# ---------------------------------------------------------------------------


def _crossings_1d(gi, gj) -> tuple[tuple[float, float], ...]:
    """
    {x : g_i(x) >= g_j(x)} in R^1 as closed intervals.

    Cuts are the breakpoints of both densities plus sign changes of g_i - g_j
    located with brentq on a scan grid; membership is constant between cuts.
    """
    lo_i, hi_i = gi.bounding_box(GRID_TAIL_MASS)
    lo_j, hi_j = gj.bounding_box(GRID_TAIL_MASS)
    lo = float(min(lo_i[0], lo_j[0]))
    hi = float(max(hi_i[0], hi_j[0]))
    breaks = sorted(set(gi.breakpoints_1d()) | set(gj.breakpoints_1d()))
    cuts = set(breaks)

    def gap(x: float) -> float:
        point = np.array([[x]])
        return float(gi.pdf(point)[0] - gj.pdf(point)[0])

    both_constant = getattr(gi, "is_piecewise_constant", False) and getattr(
        gj, "is_piecewise_constant", False
    )
    if not both_constant and hi > lo:
        scan = np.union1d(np.linspace(lo, hi, YATRACOS_GRID_CELLS + 1), np.array(breaks, dtype=float))
        X = scan[:, None]
        values = gi.pdf(X) - gj.pdf(X)
        sign = np.sign(values)
        # A scan point sitting exactly on a crossing is a cut by itself
        cuts.update(float(v) for v in scan[sign == 0])
        for k in np.flatnonzero(sign[:-1] * sign[1:] < 0):
            a, b = float(scan[k]), float(scan[k + 1])
            cuts.add(brentq(gap, a, b, xtol=1e-13) if gap(a) * gap(b) < 0 else b)

    points = sorted(cuts)
    if not points:
        return ((-math.inf, math.inf),) if gap(0.0) >= 0 else ()
    edges = [-math.inf, *points, math.inf]
    cell_points = [points[0] - 1.0]
    cell_points += [0.5 * (a + b) for a, b in zip(points[:-1], points[1:], strict=True)]
    cell_points.append(points[-1] + 1.0)
    inside = np.asarray(gi.pdf(np.array(cell_points)[:, None]) >= gj.pdf(np.array(cell_points)[:, None]))

    spans: list[list[float]] = []
    for k, member in enumerate(inside):
        if not member:
            continue
        a, b = edges[k], edges[k + 1]
        if spans and spans[-1][1] == a:
            spans[-1][1] = b
        else:
            spans.append([a, b])
    return tuple((a, b) for a, b in spans)


def yatracos_set(cls: CandidateClass, i: int, j: int) -> YatracosSet:
    gi, gj = cls[i], cls[j]
    label = f"{{{cls.labels[i]} >= {cls.labels[j]}}}"
    if cls.dimension == 1:
        predicate = intervals_set(_crossings_1d(gi, gj), label=label)
    else:

        def membership(X: np.ndarray) -> np.ndarray:
            return gi.pdf(X) >= gj.pdf(X)

        predicate = SetPredicate(cls.dimension, membership, label)
    return YatracosSet(i, j, predicate)


def yatracos_family(cls: CandidateClass) -> list[YatracosSet]:
    """All ordered pairs (i, j), i ≠ j; empty for a singleton class."""
    return [
        yatracos_set(cls, i, j) for i in range(len(cls)) for j in range(len(cls)) if i != j
    ]


def _level_memberships(g: PiecewisePolytopeDensity, X: np.ndarray) -> np.ndarray:
    if not g.levels:
        return np.zeros((X.shape[0], 0), dtype=bool)
    return np.column_stack([lv.polytope.contains_many(X) for lv in g.levels])


def yatracos_membership_via_levels(
    g: PiecewisePolytopeDensity, g_other: PiecewisePolytopeDensity, x
) -> bool | np.ndarray:
    """
    g(x) >= g'(x) decided from level memberships and the ordering of heights only.

    x is in the set iff some P_i contains it while no P'_k with y'_k > y_i
    does. Points outside every polytope of both densities count as members.
    A single point gives a bool, an (N, d) array gives a boolean array.
    """
    if g.dimension != g_other.dimension:
        raise DimensionMismatchError("difference sets need densities of the same dimension")
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 0 or (pts.ndim == 1 and (g.dimension > 1 or pts.shape[0] == 1))
    pts = pts.reshape(-1, g.dimension)

    mine = _level_memberships(g, pts)
    theirs = _level_memberships(g_other, pts)
    result = np.zeros(pts.shape[0], dtype=bool)
    for i, y in enumerate(g.heights):
        blocked = theirs[:, g_other.heights > y].any(axis=1)
        result |= mine[:, i] & ~blocked
    result |= ~mine.any(axis=1) & ~theirs.any(axis=1)
    return bool(result[0]) if single else result


def yatracos_set_function(
    heights: Sequence[float],
    heights_other: Sequence[float],
    sets: Sequence[frozenset],
    sets_other: Sequence[frozenset],
    universe: frozenset,
) -> frozenset:
    """
    The same rule on explicit index sets.

    sets[i] holds the indices of the universe inside P_i. The result is
    ∪_i (S_i minus every S'_k with y'_k > y_i), together with the indices
    outside all sets of both sides.
    """
    result: set = set()
    for y, members in zip(heights, sets, strict=True):
        blocked: set = set()
        for y_other, others in zip(heights_other, sets_other, strict=True):
            if y_other > y:
                blocked |= others
        result |= members - blocked
    covered = set().union(*sets, *sets_other) if (sets or sets_other) else set()
    result |= universe - covered
    return frozenset(result)


def difference_set_on_points(
    g: PiecewisePolytopeDensity, g_other: PiecewisePolytopeDensity, points
) -> frozenset:
    """Indices of points in {g >= g'} through the index-set rule."""
    pts = np.asarray(points, dtype=float).reshape(-1, g.dimension)
    mine = _level_memberships(g, pts)
    theirs = _level_memberships(g_other, pts)
    return yatracos_set_function(
        list(g.heights),
        list(g_other.heights),
        [frozenset(np.flatnonzero(mine[:, k]).tolist()) for k in range(mine.shape[1])],
        [frozenset(np.flatnonzero(theirs[:, k]).tolist()) for k in range(theirs.shape[1])],
        frozenset(range(pts.shape[0])),
    )


# ---------------------------------------------------------------------------
# Selection
# ---------------------------------------------------------------------------


def required_samples(V: int, epsilon: float, c: float = DEFAULT_SAMPLE_CONSTANT) -> int:
    """n = ⌈c·V/ε²⌉."""
    if V < 1:
        raise ConfigError(f"V must be >= 1, got {V}")
    if not 0.0 < epsilon < 1.0:
        raise ConfigError(f"epsilon must lie in (0, 1), got {epsilon}")
    return ceil_guarded(c * V / epsilon**2)


def sample_complexity_bound(d: int, epsilon: float, constant: float = 1.0) -> float:
    """constant·(d/ε)^((d+5)/2)·ln²(1/ε), the asymptotic sample size for log-concave learning."""
    return constant * (d / epsilon) ** ((d + 5) / 2) * math.log(1.0 / epsilon) ** 2


def seed_label(seed: SeedLike) -> Any:
    """JSON-friendly form of a seed."""
    if seed is None or isinstance(seed, int):
        return seed
    sequence = as_seed_sequence(seed)
    return {"entropy": sequence.entropy, "spawn_key": list(sequence.spawn_key)}


@dataclass
class SelectionResult:
    """Outcome of one minimum-distance selection."""

    chosen_index: int
    score_matrix: np.ndarray
    n: int
    seed: Any
    integral_budget: int
    set_pairs: list[tuple[int, int]] = field(default_factory=list)

    @property
    def row_max(self) -> np.ndarray:
        if self.score_matrix.shape[1] == 0:
            return np.zeros(self.score_matrix.shape[0])
        return self.score_matrix.max(axis=1)

    def certificate_holds(self) -> bool:
        scores = self.row_max
        return bool(np.all(scores[self.chosen_index] <= scores))

    def to_dict(self) -> dict[str, Any]:
        return {
            "chosen_index": self.chosen_index,
            "score_matrix": self.score_matrix.tolist(),
            "row_max": self.row_max.tolist(),
            "set_pairs": [list(p) for p in self.set_pairs],
            "n": self.n,
            "seed": seed_label(self.seed),
            "integral_budget": self.integral_budget,
        }


def select(
    cls: CandidateClass,
    samples: EmpiricalDistribution,
    integral_budget: int = DEFAULT_INTEGRAL_BUDGET,
    seed: SeedLike = 0,
) -> SelectionResult:
    """
    Candidate minimizing max over the difference sets of |g(A) - f̂_n(A)|.

    Each candidate measures every set against one pool of points, so the
    scores in a row share their noise. Ties go to the lowest index.

    Args:
        cls: Candidate class
        samples: Observed sample as an empirical distribution
        integral_budget: Pool size per candidate for non-exact set masses
        seed: Root seed; candidate k uses child stream k

    Returns:
        SelectionResult with the full score matrix
    """
    if len(cls) == 0:
        raise SelectionError("candidate class is empty")
    if samples.dimension != cls.dimension:
        raise DimensionMismatchError(
            f"samples live in R^{samples.dimension}, candidates in R^{cls.dimension}"
        )
    family = yatracos_family(cls)
    pairs = [(A.i, A.j) for A in family]
    if not family:
        return SelectionResult(0, np.zeros((1, 0)), samples.n, seed, integral_budget, pairs)

    observed = np.array([empirical_measure(samples, A.predicate) for A in family])
    child_seeds = spawn_seeds(seed, len(cls))

    def make_task(g, child):
        def task() -> np.ndarray:
            pool = MassPool(g, integral_budget, child)
            return np.array([pool.mass(A.predicate).value for A in family])

        return task

    rows = run_ordered([make_task(g, s) for g, s in zip(cls.members, child_seeds, strict=True)])
    scores = np.abs(np.vstack(rows) - observed[None, :])
    chosen = int(np.argmin(scores.max(axis=1)))
    result = SelectionResult(chosen, scores, samples.n, seed, integral_budget, pairs)
    if not result.certificate_holds():
        raise SelectionError("chosen candidate does not minimize the row maximum")
    logger.debug(
        "selected %s (row max %.4f) among %d candidates",
        cls.labels[chosen],
        result.row_max[chosen],
        len(cls),
    )
    return result


class HarnessReport(NamedTuple):
    """Repeated selection from fresh samples against the 3·OPT + ε threshold."""

    success_rate: float
    successes: int
    trials: int
    n: int
    opt_estimate: float
    opt_stderr: float
    threshold: float
    tv_errors: list[float]
    chosen: list[int]
    member_tv: list[float]

    def to_dict(self) -> dict[str, Any]:
        return self._asdict()


def guarantee_harness(
    f_true,
    cls: CandidateClass,
    epsilon: float,
    trials: int,
    seed: SeedLike = 0,
    n: int | None = None,
    V: int = 2,
    c: float = DEFAULT_SAMPLE_CONSTANT,
    integral_budget: int = DEFAULT_INTEGRAL_BUDGET,
    distance_budget: int | None = None,
) -> HarnessReport:
    """
    Run `trials` independent selections and count TV(chosen, f) <= 3·OPT + ε.

    OPT is the smallest TV between the truth and a candidate; every
    candidate's distance to the truth is computed once and reused.
    """
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    if f_true.dimension != cls.dimension:
        raise DimensionMismatchError("truth and candidates differ in dimension")
    n = n if n is not None else required_samples(V, epsilon, c)
    distance_seed, trial_root = spawn_seeds(seed, 2)

    member_seeds = spawn_seeds(distance_seed, len(cls))
    member_tv = run_ordered(
        [
            (lambda g=g, s=s: tv_distance(g, f_true, budget=distance_budget, seed=s))
            for g, s in zip(cls.members, member_seeds, strict=True)
        ]
    )
    best = min(range(len(cls)), key=lambda k: member_tv[k].value)
    opt = member_tv[best]
    threshold = 3.0 * opt.value + epsilon

    def make_trial(child):
        def trial() -> int:
            sample_seed, select_seed = spawn_seeds(child, 2)
            samples = EmpiricalDistribution(f_true.sample(n, sample_seed))
            return select(cls, samples, integral_budget, select_seed).chosen_index

        return trial

    chosen = run_ordered([make_trial(s) for s in spawn_seeds(trial_root, trials)])
    errors = [member_tv[k].value for k in chosen]
    successes = sum(
        1
        for k in chosen
        if member_tv[k].value
        <= threshold + 3.0 * (member_tv[k].stderr + 3.0 * opt.stderr)
    )
    logger.info(
        "harness: %d/%d within 3·OPT + ε = %.4f (OPT=%.4f, n=%d)",
        successes,
        trials,
        threshold,
        opt.value,
        n,
    )
    return HarnessReport(
        successes / trials,
        successes,
        trials,
        n,
        opt.value,
        opt.stderr,
        threshold,
        errors,
        chosen,
        [m.value for m in member_tv],
    )


class GapReport(NamedTuple):
    """TV between two densities against their A-norm over the approximations' difference sets."""

    tv: float
    tv_stderr: float
    anorm: float
    anorm_stderr: float
    slack: float
    holds: bool


def tv_anorm_gap_check(
    f,
    f_other,
    epsilon: float,
    approx_epsilon: float | None = None,
    budget: int = DEFAULT_INTEGRAL_BUDGET,
    seed: SeedLike = 0,
) -> GapReport:
    """
    Check d_TV(f, f') <= ‖f - f'‖_A + ε/2, with A the two difference sets of
    approximations g, g' of f and f'.
    """
    approx_epsilon = approx_epsilon if approx_epsilon is not None else epsilon / 4.0
    config = ApproxConfig(approx_epsilon)
    seed_g, seed_h, seed_tv, seed_norm = spawn_seeds(seed, 4)
    g = build_approximation(f, config, seed_g)
    g_other = build_approximation(f_other, config, seed_h)
    pair = CandidateClass((g, g_other), ("g", "g'"))
    family = [A.predicate for A in yatracos_family(pair)]
    tv = tv_distance(f, f_other, seed=seed_tv)
    norm = anorm(f, f_other, family, budget, seed_norm)
    slack = epsilon / 2.0
    holds = tv.value <= norm.value + slack + 3.0 * math.hypot(tv.stderr, norm.stderr)
    return GapReport(tv.value, tv.stderr, norm.value, norm.stderr, slack, bool(holds))
