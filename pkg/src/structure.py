#!/usr/bin/env python3
"""
ABOUTME: Piecewise-polytope densities built from level ladders of a log-concave density
ABOUTME: Class parameters, ladder, inscribed level polytopes, dual evaluation and numerical checks
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, NamedTuple

import numpy as np

from densities import LogConcaveDensity
from geometry import (
    ConvexBody,
    Polytope,
    SetPredicate,
    empty_set,
    inscribed_polytope,
    polytope_set,
    union_of,
    volume,
    volume_deficit,
    whole_space,
)
from lab_config import (
    DEFAULT_C_DELTA,
    DEFAULT_C_H,
    DEFAULT_C_L,
    DEFAULT_MC_BUDGET,
    DEGENERATE_RADIUS,
    GRID_TAIL_MASS,
    MAX_APPROX_DIMENSION,
    RAY_TOLERANCE,
    ceil_guarded,
    validate_dimension,
    validate_epsilon,
)
from lab_errors import (
    ConfigError,
    DegenerateGeometryError,
    DimensionMismatchError,
    LevelSetError,
    SamplerError,
)
from lab_utils import SeedLike, make_rng, run_ordered, spawn_seeds
from metrics import IntegralEstimate, MassPool, l1_distance


logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Configuration and class parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ApproxConfig:
    """
    Constants of the approximation class.

    Attributes:
        epsilon: Accuracy parameter in (0, 1/2]
        c_L: Multiplier in the number of levels
        c_H: Constant inside the facet budget
        c_delta: Base constant of the tail threshold ε² / (c_delta·d)^(2d)
        mc_budget: Samples per Monte Carlo volume or deficit estimate
        tol: Ray bisection tolerance
        max_facets: Explicit facet budget overriding H
        plateau: Add a top level at M_f when L_f(M_f) has positive volume
    """

    epsilon: float
    c_L: float = DEFAULT_C_L
    c_H: float = DEFAULT_C_H
    c_delta: float = DEFAULT_C_DELTA
    mc_budget: int = DEFAULT_MC_BUDGET
    tol: float = RAY_TOLERANCE
    max_facets: int | None = None
    plateau: bool = True

    def __post_init__(self):
        validate_epsilon(self.epsilon)
        if self.c_L < 1 or self.c_H < 1:
            raise ConfigError(f"c_L and c_H must be >= 1, got c_L={self.c_L}, c_H={self.c_H}")
        if self.c_delta <= 0:
            raise ConfigError(f"c_delta must be positive, got {self.c_delta}")
        if self.mc_budget < 1:
            raise ConfigError("mc_budget must be >= 1")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


class ClassParams(NamedTuple):
    L: int  # number of levels
    H: int  # facets per level polytope


def class_params(
    d: int, epsilon: float, c_L: float = DEFAULT_C_L, c_H: float = DEFAULT_C_H
) -> ClassParams:
    """
    L = ⌈c_L((1/ε)ln(1/ε) + d·ln max(d, 2))⌉ and H = ⌈(c_H·d/ε)^((d-1)/2)⌉.

    d = 1 gives H = 1 (zero exponent).
    """
    validate_dimension(d)
    validate_epsilon(epsilon)
    L = ceil_guarded(c_L * ((1.0 / epsilon) * math.log(1.0 / epsilon) + d * math.log(max(d, 2))))
    H = 1 if d == 1 else ceil_guarded((c_H * d / epsilon) ** ((d - 1) / 2))
    return ClassParams(max(1, L), H)


def ladder(max_value: float, epsilon: float, L: int) -> list[float]:
    """[M(1-ε)^i for i = 1..L], strictly decreasing."""
    if not max_value > 0:
        raise ConfigError(f"ladder top must be positive, got {max_value}")
    if not 0.0 < epsilon < 1.0:
        raise ConfigError(f"ladder ratio needs epsilon in (0, 1), got {epsilon}")
    if L < 1:
        raise ConfigError(f"ladder needs L >= 1, got {L}")
    ratio = 1.0 - epsilon
    values = []
    y = max_value
    for _ in range(L):
        y *= ratio
        values.append(y)
    return values


def delta_threshold(d: int, epsilon: float, c_delta: float = DEFAULT_C_DELTA) -> float:
    """δ = ε² / (c_delta·d)^(2d)."""
    return epsilon**2 / (c_delta * d) ** (2 * d)


class DeltaCheck(NamedTuple):
    """Whether the second-lowest ladder value falls below δ·M_f."""

    L: int
    ratio: float  # y_{L-1} / M_f = (1-ε)^(L-1)
    delta: float
    holds: bool


def delta_check(d: int, config: ApproxConfig) -> DeltaCheck:
    L, _ = class_params(d, config.epsilon, config.c_L, config.c_H)
    ratio = (1.0 - config.epsilon) ** (L - 1)
    delta = delta_threshold(d, config.epsilon, config.c_delta)
    return DeltaCheck(L, ratio, delta, ratio <= delta)


def min_c_L_for_delta(d: int, epsilon: float, c_delta: float = DEFAULT_C_DELTA) -> float:
    """Smallest c_L (>= 1) whose L puts y_{L-1} at or below δ·M_f."""
    validate_epsilon(epsilon)
    needed_levels = math.ceil(
        1.0 + math.log(delta_threshold(d, epsilon, c_delta)) / math.log(1.0 - epsilon)
    )
    base = (1.0 / epsilon) * math.log(1.0 / epsilon) + d * math.log(max(d, 2))
    return max(1.0, needed_levels / base)


# ---------------------------------------------------------------------------
# The piecewise-polytope density
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Level:
    y: float
    polytope: Polytope


@dataclass(frozen=True, eq=False)
class PiecewisePolytopeDensity:
    """
    g(x) = max{y_i : x ∈ P_i}, and 0 outside every P_i.

    Levels are stored with strictly decreasing heights, so the maximum is
    also the height of the first containing polytope.
    """

    levels: tuple[Level, ...]
    epsilon: float
    dimension: int
    ladder_values: tuple[float, ...] = ()
    facet_budget: int | None = None
    provenance: dict | None = None
    diagnostics: dict = field(default_factory=dict)
    is_normalized: bool = False

    has_sampler = False
    is_piecewise_constant = True
    family_tag = "piecewise-polytope"

    def __post_init__(self):
        levels = tuple(self.levels)
        object.__setattr__(self, "levels", levels)
        ys = [lv.y for lv in levels]
        if any(y <= 0 for y in ys):
            raise ConfigError("level heights must be positive")
        if any(a <= b for a, b in zip(ys, ys[1:], strict=False)):
            raise ConfigError("level heights must be strictly decreasing")
        for lv in levels:
            if lv.polytope.dimension != self.dimension:
                raise DimensionMismatchError("level polytope dimension differs from the density")
            if self.facet_budget is not None and lv.polytope.facet_count > self.facet_budget:
                raise ConfigError(
                    f"level polytope has {lv.polytope.facet_count} facets, "
                    f"budget is {self.facet_budget}"
                )
        heights = np.array(ys, dtype=float)
        heights.setflags(write=False)
        object.__setattr__(self, "_heights", heights)
        object.__setattr__(self, "ladder_values", tuple(float(y) for y in self.ladder_values))

    @property
    def heights(self) -> np.ndarray:
        return self._heights

    @property
    def level_count(self) -> int:
        return len(self.levels)

    @property
    def ladder_range(self) -> tuple[float, float]:
        """(y_L, y_1) of the underlying ladder."""
        values = self.ladder_values or tuple(self._heights)
        if not values:
            raise LevelSetError("density has no levels")
        return min(values), max(values)

    def _memberships(self, X: np.ndarray) -> np.ndarray:
        if not self.levels:
            return np.zeros((X.shape[0], 0), dtype=bool)
        return np.column_stack([lv.polytope.contains_many(X) for lv in self.levels])

    def _points(self, X) -> np.ndarray:
        pts = np.asarray(X, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1) if self.dimension == 1 else pts.reshape(1, -1)
        if pts.shape[1] != self.dimension:
            raise DimensionMismatchError(
                f"density lives in R^{self.dimension}, points have dimension {pts.shape[1]}"
            )
        return pts

    def pdf(self, X) -> np.ndarray:
        """Max rule: largest height among the polytopes containing each point."""
        pts = self._points(X)
        inside = self._memberships(pts)
        if inside.shape[1] == 0:
            return np.zeros(pts.shape[0])
        return np.max(np.where(inside, self._heights[None, :], 0.0), axis=1)

    def pdf_min_index(self, X) -> np.ndarray:
        """First-index rule: height of the lowest-index polytope containing each point."""
        pts = self._points(X)
        inside = self._memberships(pts)
        if inside.shape[1] == 0:
            return np.zeros(pts.shape[0])
        first = np.argmax(inside, axis=1)
        return np.where(inside.any(axis=1), self._heights[first], 0.0)

    def bounding_box(self, mass_out: float = GRID_TAIL_MASS) -> tuple[np.ndarray, np.ndarray]:
        if not self.levels:
            return np.zeros(self.dimension), np.zeros(self.dimension)
        boxes = [lv.polytope.bounding_box() for lv in self.levels]
        return np.min([b[0] for b in boxes], axis=0), np.max([b[1] for b in boxes], axis=0)

    def breakpoints_1d(self) -> list[float]:
        if self.dimension != 1:
            return []
        points = set()
        for lv in self.levels:
            lo, hi = lv.polytope.bounding_box()
            points.update((float(lo[0]), float(hi[0])))
        return sorted(points)

    def sample(self, n: int, seed: SeedLike = 0) -> np.ndarray:
        raise SamplerError("piecewise-polytope densities are integrated, not sampled")

    def scaled(self, factor: float, normalized: bool = False) -> "PiecewisePolytopeDensity":
        """The same polytopes with every height multiplied by factor."""
        if not factor > 0:
            raise ConfigError("scale factor must be positive")
        return PiecewisePolytopeDensity(
            levels=tuple(Level(lv.y * factor, lv.polytope) for lv in self.levels),
            epsilon=self.epsilon,
            dimension=self.dimension,
            ladder_values=tuple(y * factor for y in self.ladder_values),
            facet_budget=self.facet_budget,
            provenance=self.provenance,
            diagnostics=dict(self.diagnostics),
            is_normalized=normalized,
        )

    def normalized(self, budget: int = DEFAULT_MC_BUDGET, seed: SeedLike = 0):
        """Rescaled copy with total mass 1 (exact in d = 1 and for nested levels in d = 2)."""
        total = integral_of_g(self, budget, seed)
        if not total.value > 0:
            raise DegenerateGeometryError("cannot normalize a density with zero mass")
        return self.scaled(1.0 / total.value, normalized=True)

    def to_dict(self) -> dict[str, Any]:
        return {
            "epsilon": self.epsilon,
            "d": self.dimension,
            "ladder": list(self.ladder_values),
            "facet_budget": self.facet_budget,
            "is_normalized": self.is_normalized,
            "provenance": self.provenance,
            "levels": [
                {
                    "y": lv.y,
                    "halfspaces": [h.to_dict() for h in lv.polytope.halfspaces],
                    "bounded": lv.polytope.bounded,
                    **(
                        {"vertices": lv.polytope.to_dict()["vertices"]}
                        if lv.polytope.vertices is not None
                        else {}
                    ),
                }
                for lv in self.levels
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "PiecewisePolytopeDensity":
        d = int(payload["d"])
        levels = []
        for entry in payload["levels"]:
            polytope = Polytope.from_dict(
                {
                    "dimension": d,
                    "halfspaces": entry["halfspaces"],
                    "vertices": entry.get("vertices"),
                    "bounded": entry.get("bounded", "vertices" in entry),
                }
            )
            levels.append(Level(float(entry["y"]), polytope))
        return cls(
            levels=tuple(levels),
            epsilon=float(payload["epsilon"]),
            dimension=d,
            ladder_values=tuple(payload.get("ladder", ())),
            facet_budget=payload.get("facet_budget"),
            provenance=payload.get("provenance"),
            is_normalized=bool(payload.get("is_normalized", False)),
        )

    @classmethod
    def from_json(cls, text: str) -> "PiecewisePolytopeDensity":
        return cls.from_dict(json.loads(text))

    def __repr__(self) -> str:
        return (
            f"PiecewisePolytopeDensity(d={self.dimension}, eps={self.epsilon}, "
            f"levels={self.level_count})"
        )


def eval_piecewise(g: PiecewisePolytopeDensity, x) -> float:
    """g at one point by the max rule."""
    vec = np.asarray(x, dtype=float).reshape(-1)
    if vec.shape[0] != g.dimension:
        raise DimensionMismatchError(f"point in R^{vec.shape[0]}, density in R^{g.dimension}")
    return float(g.pdf(vec[None, :])[0])


def eval_piecewise_min_index(g: PiecewisePolytopeDensity, x) -> float:
    vec = np.asarray(x, dtype=float).reshape(-1)
    if vec.shape[0] != g.dimension:
        raise DimensionMismatchError(f"point in R^{vec.shape[0]}, density in R^{g.dimension}")
    return float(g.pdf_min_index(vec[None, :])[0])


def level_set_of_g(g: PiecewisePolytopeDensity, y: float) -> SetPredicate:
    """{x : g(x) >= y} = union of the P_j with y_j >= y."""
    if not y > 0:
        raise LevelSetError(f"level must be positive, got {y}")
    members = [polytope_set(lv.polytope) for lv in g.levels if lv.y >= y]
    if not members:
        return empty_set(g.dimension)
    return union_of(members, g.dimension, label=f"L_g({y:.4g})")


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


@dataclass
class LevelOutcome:
    """What happened when building one level."""

    y: float
    status: str  # built | exact | empty | degenerate | duplicate
    polytope: Polytope | None = None
    directions: int = 0
    deficit: float | None = None
    deficit_stderr: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "y": self.y,
            "status": self.status,
            "facets": self.polytope.facet_count if self.polytope is not None else 0,
            "directions": self.directions,
            "deficit": self.deficit,
            "deficit_stderr": self.deficit_stderr,
        }


def _direction_candidates(d: int, facet_cap: int) -> list[int]:
    if d == 1:
        return [2]
    if d == 2:
        return list(range(3, facet_cap + 1))
    # Generic hulls of m points on a 2-sphere have about 2m - 4 triangles
    candidates = []
    m = d + 1
    while m <= facet_cap + 4:
        candidates.append(m)
        m = m + max(1, m // 2)
    return candidates


def _build_level(
    f: LogConcaveDensity, y: float, facet_cap: int, config: ApproxConfig, seed: SeedLike
) -> LevelOutcome:
    body = f.level_set(y)
    if body is None:
        return LevelOutcome(y, "empty")
    if body.is_degenerate or (body.radius is not None and body.radius <= DEGENERATE_RADIUS):
        return LevelOutcome(y, "degenerate")

    if body.polytope is not None and body.polytope.facet_count <= facet_cap:
        return LevelOutcome(y, "exact", body.polytope, 0, 0.0, 0.0)

    best: LevelOutcome | None = None
    for m in _direction_candidates(f.dimension, facet_cap):
        try:
            P = inscribed_polytope(body, m, seed=seed, tol=config.tol)
        except DegenerateGeometryError:
            continue
        if P.facet_count > facet_cap:
            break
        deficit = volume_deficit(body, P, config.mc_budget, seed)
        best = LevelOutcome(y, "built", P, m, deficit.value, deficit.stderr)
        if deficit.value <= config.epsilon:
            break

    if best is None:
        logger.warning("⚠️  level y=%.4g: no inscribed polytope fits %d facets", y, facet_cap)
        return LevelOutcome(y, "degenerate")
    if best.deficit > config.epsilon:
        logger.warning(
            "⚠️  level y=%.4g: deficit %.4f exceeds eps=%.3g within %d facets",
            y,
            best.deficit,
            config.epsilon,
            facet_cap,
        )
    return best


def _same_polytope(a: Polytope, b: Polytope) -> bool:
    return a is b or (a.A.shape == b.A.shape and np.array_equal(a.A, b.A) and np.array_equal(a.b, b.b))


def build_approximation(
    f: LogConcaveDensity, config: ApproxConfig, seed: SeedLike = 0
) -> PiecewisePolytopeDensity:
    """
    Piecewise-polytope approximation g <= f of a log-concave density.

    For each ladder height y_i the level set L_f(y_i) is approximated from
    inside: polytope level sets within the facet budget are used as they
    are; other bodies get inscribed polytopes with increasing direction
    counts until the relative deficit is at most ε or the budget is hit.

    Args:
        f: Log-concave density with level-set oracle, d <= 3
        config: Class constants and budgets
        seed: Root seed; each level gets its own child stream

    Returns:
        PiecewisePolytopeDensity whose diagnostics hold per-level outcomes
    """
    d = f.dimension
    if d > MAX_APPROX_DIMENSION:
        raise ConfigError(f"approximations are built for d <= {MAX_APPROX_DIMENSION}, got d={d}")
    if not getattr(f, "is_log_concave", False):
        raise ConfigError("build_approximation needs a log-concave density")
    params = class_params(d, config.epsilon, config.c_L, config.c_H)
    if config.max_facets is not None and config.max_facets < d + 1:
        raise ConfigError(f"facet budget {config.max_facets} cannot bound a body in R^{d}")
    budget = config.max_facets if config.max_facets is not None else params.H
    facet_cap = max(budget, d + 1)
    if facet_cap != budget:
        logger.debug("facet budget %d raised to %d so level polytopes are bounded", budget, facet_cap)

    M = f.max_value
    heights = ladder(M, config.epsilon, params.L)
    plateau = False
    if config.plateau:
        top = f.level_set(M)
        plateau = top is not None and not top.is_degenerate
    all_heights = ([M] if plateau else []) + heights

    seeds = spawn_seeds(seed, len(all_heights))
    tasks = [
        (lambda y=y, s=s: _build_level(f, y, facet_cap, config, s))
        for y, s in zip(all_heights, seeds, strict=True)
    ]
    outcomes: list[LevelOutcome] = run_ordered(tasks)

    levels: list[Level] = []
    for outcome in outcomes:
        if outcome.polytope is None:
            logger.debug("skipping %s level y=%.4g", outcome.status, outcome.y)
            continue
        if levels and _same_polytope(levels[-1].polytope, outcome.polytope):
            outcome.status = "duplicate"
            continue
        levels.append(Level(outcome.y, outcome.polytope))

    skipped = [o.y for o in outcomes if o.status in ("empty", "degenerate")]
    deficits = [o.deficit for o in outcomes if o.deficit is not None]
    diagnostics = {
        "L": params.L,
        "H": params.H,
        "facet_cap": facet_cap,
        "plateau": plateau,
        "levels": [o.to_dict() for o in outcomes],
        "skipped_levels": skipped,
        "max_deficit": max(deficits) if deficits else 0.0,
        "over_budget_levels": sum(1 for v in deficits if v > config.epsilon),
        "config": config.to_dict(),
    }
    logger.info(
        "built approximation: d=%d eps=%.3g L=%d H=%d kept=%d skipped=%d max deficit=%.4f",
        d,
        config.epsilon,
        params.L,
        params.H,
        len(levels),
        len(skipped),
        diagnostics["max_deficit"],
    )
    return PiecewisePolytopeDensity(
        levels=tuple(levels),
        epsilon=config.epsilon,
        dimension=d,
        ladder_values=tuple(heights),
        facet_budget=facet_cap,
        provenance=f.to_spec(),
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


def _union_volume(
    polytopes: list[Polytope], budget: int, seed: SeedLike
) -> tuple[float, float, str]:
    """
    Volume of a union of bounded polytopes.

    Exact when one polytope contains all the others (checked on vertices) and
    its volume is exact; Monte Carlo over the union's box otherwise.
    """
    if not polytopes:
        return 0.0, 0.0, "exact"
    d = polytopes[0].dimension
    union = union_of([polytope_set(P) for P in polytopes], d)
    if union.intervals is not None:
        return sum(b - a for a, b in union.intervals), 0.0, "exact-1d"

    if all(P.vertices is not None for P in polytopes):
        for outer in polytopes:
            if all(outer.contains_many(P.vertices, tol=1e-9).all() for P in polytopes):
                estimate = volume(outer, seed=seed, mc_samples=budget)
                return estimate.value, estimate.stderr, estimate.method

    boxes = [P.bounding_box() for P in polytopes]
    lo = np.min([b[0] for b in boxes], axis=0)
    hi = np.max([b[1] for b in boxes], axis=0)
    body = ConvexBody(
        dimension=d,
        membership=union.contains_many,
        interior_point=0.5 * (lo + hi),
        bounding_box=(lo, hi),
        label="union",
    )
    estimate = volume(body, "monte-carlo", mc_samples=budget, seed=seed)
    return estimate.value, estimate.stderr, estimate.method


def integral_of_g(
    g: PiecewisePolytopeDensity, budget: int = DEFAULT_MC_BUDGET, seed: SeedLike = 0
) -> IntegralEstimate:
    """
    ∫g by the layer-cake sum Σ_j (y_j - y_{j+1})·vol(P_1 ∪ … ∪ P_j).

    Exact in d = 1 and when the unions are exactly measurable; otherwise
    uniform Monte Carlo of g over its bounding box.
    """
    if not g.levels:
        return IntegralEstimate(0.0, 0.0, "exact")
    if g.dimension == 1:
        return MassPool(g, budget, seed).mass(whole_space(1))

    if g.dimension == 2 and all(lv.polytope.vertices is not None for lv in g.levels):
        heights = [*g.heights, 0.0]
        total = 0.0
        for j in range(g.level_count):
            value, _, method = _union_volume([lv.polytope for lv in g.levels[: j + 1]], budget, seed)
            if method != "exact-2d":
                break
            total += (heights[j] - heights[j + 1]) * value
        else:
            return IntegralEstimate(total, 0.0, "layer-cake")
    return MassPool(g, budget, seed).mass(whole_space(g.dimension))


def tail_mass(
    f: LogConcaveDensity, y_cut: float, budget: int = DEFAULT_MC_BUDGET, seed: SeedLike = 0
) -> IntegralEstimate:
    """
    ∫_0^{y_cut} vol(L_f(y)) dy, computed as the mass of f at heights <= y_cut.

    The two agree by the layer-cake identity. Uses f's own samples when it
    has a sampler, uniform Monte Carlo over its bounding box otherwise.
    """
    M = f.max_value
    if not 0.0 < y_cut <= M * (1.0 + 1e-12):
        raise LevelSetError(f"y_cut must lie in (0, M_f={M:.6g}], got {y_cut}")
    if f.has_sampler:
        X = f.sample(budget, seed)
        p = float(np.count_nonzero(f.pdf(X) <= y_cut)) / budget
        return IntegralEstimate(p, math.sqrt(p * (1.0 - p) / budget), "sampler")
    lo, hi = f.bounding_box()
    X = make_rng(seed).uniform(lo, hi, size=(budget, f.dimension))
    values = f.pdf(X)
    terms = np.where(values <= y_cut, values, 0.0)
    scale = float(np.prod(hi - lo))
    return IntegralEstimate(
        scale * float(terms.mean()),
        scale * float(terms.std(ddof=1)) / math.sqrt(budget),
        "monte-carlo",
    )


class SandwichReport(NamedTuple):
    """vol(L_g(y)) against (1-ε)·vol(L_f(y/(1-ε)))."""

    y: float
    lhs: float
    lhs_stderr: float
    rhs: float
    rhs_stderr: float
    passed: bool

    def to_dict(self) -> dict[str, Any]:
        return self._asdict()


def volume_sandwich_check(
    f: LogConcaveDensity,
    g: PiecewisePolytopeDensity,
    y: float,
    budget: int = DEFAULT_MC_BUDGET,
    seed: SeedLike = 0,
) -> SandwichReport:
    """Pass iff lhs >= rhs - 3·(combined stderr)."""
    low, high = g.ladder_range
    if not low * (1 - 1e-12) <= y <= high * (1 + 1e-12):
        raise LevelSetError(f"y={y} outside the ladder range [{low:.6g}, {high:.6g}]")
    seed_g, seed_f = spawn_seeds(seed, 2)
    lhs, lhs_err, _ = _union_volume([lv.polytope for lv in g.levels if lv.y >= y], budget, seed_g)

    body = f.level_set(y / (1.0 - g.epsilon))
    if body is None or body.is_degenerate:
        rhs, rhs_err = 0.0, 0.0
    else:
        estimate = volume(body, mc_samples=budget, seed=seed_f)
        rhs = (1.0 - g.epsilon) * estimate.value
        rhs_err = (1.0 - g.epsilon) * estimate.stderr
    passed = lhs >= rhs - 3.0 * math.hypot(lhs_err, rhs_err) - 1e-12 * max(1.0, rhs)
    return SandwichReport(y, lhs, lhs_err, rhs, rhs_err, bool(passed))


def domination_violations(
    f: LogConcaveDensity, g: PiecewisePolytopeDensity, n: int = 100_000, seed: SeedLike = 0
) -> int:
    """
    Points where g(x) > f(x).

    Half the points come from f (where f has mass), half uniformly from g's
    bounding box (where g is positive).
    """
    seed_f, seed_box = spawn_seeds(seed, 2)
    half = n // 2
    parts = []
    if f.has_sampler:
        parts.append(f.sample(half, seed_f))
    lo, hi = g.bounding_box()
    parts.append(make_rng(seed_box).uniform(lo, hi, size=(n - len(parts) * half, g.dimension)))
    X = np.vstack(parts)
    return int(np.count_nonzero(g.pdf(X) > f.pdf(X)))


def approximation_error(
    f: LogConcaveDensity,
    g: PiecewisePolytopeDensity,
    budget: int | None = None,
    seed: SeedLike = 0,
):
    """‖f - g‖₁ (grid in d = 1, importance Monte Carlo otherwise)."""
    return l1_distance(f, g, budget=budget, seed=seed)


class ConcentrationRow(NamedTuple):
    z: float
    volume: float
    bound: float
    holds: bool


class ConcentrationReport(NamedTuple):
    """Volume of R = L_f(M_f/e) and the growth of L_f(M_f·e^-z) against z^d·vol(R)."""

    core_volume: float
    core_bound: float
    core_holds: bool
    rows: list[ConcentrationRow]


def concentration_profile(
    f: LogConcaveDensity,
    zs: list[float] | None = None,
    budget: int = DEFAULT_MC_BUDGET,
    seed: SeedLike = 0,
) -> ConcentrationReport:
    """
    Check vol(L_f(M/e)) <= e/M and vol(L_f(M e^-z)) <= z^d·vol(L_f(M/e)) for z >= 1.

    Both follow from log-concavity: points of L_f(M e^-z) shrink toward the
    mode by 1/z into L_f(M/e).
    """
    zs = zs if zs is not None else [1.0, 2.0, 4.0, 8.0]
    M = f.max_value
    d = f.dimension
    seeds = spawn_seeds(seed, len(zs) + 1)
    core = volume(f.level_set(M / math.e), mc_samples=budget, seed=seeds[0])
    # Exact volumes at z = 1 may differ from the core in the last bits
    slack = 3.0 * core.stderr + 1e-12 * core.value
    rows = []
    for z, child in zip(zs, seeds[1:], strict=True):
        if z < 1:
            raise ConfigError(f"concentration profile needs z >= 1, got {z}")
        level = volume(f.level_set(M * math.exp(-z)), mc_samples=budget, seed=child)
        bound = z**d * core.value
        rows.append(
            ConcentrationRow(
                z, level.value, bound, level.value <= bound + 3.0 * level.stderr + z**d * slack
            )
        )
    core_bound = math.e / M
    return ConcentrationReport(core.value, core_bound, core.value <= core_bound + slack, rows)
