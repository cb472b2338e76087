#!/usr/bin/env python3
"""
ABOUTME: Convex bodies, halfspace polytopes, inscribed polytope construction and volumes
ABOUTME: Hull-of-boundary-points polytopes are converted to merged facet form with scipy + networkx
"""

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import networkx as nx
import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError
from scipy.stats import norm, qmc

from lab_config import (
    COPLANAR_TOLERANCE,
    DEFAULT_MC_BUDGET,
    HALFSPACE_TOLERANCE,
    MAX_APPROX_DIMENSION,
    RAY_TOLERANCE,
    REJECTION_ACCEPTANCE_FLOOR,
    REJECTION_MAX_ROUNDS,
)
from lab_errors import (
    ConfigError,
    DegenerateGeometryError,
    DimensionMismatchError,
    GeometryError,
    SamplerError,
    UnboundedBodyError,
)
from lab_utils import SeedLike, chunk_sizes, make_rng, run_ordered, spawn_seeds


logger = logging.getLogger(__name__)

Membership = Callable[[np.ndarray], np.ndarray]


def _as_vector(x: Sequence[float] | np.ndarray, d: int | None = None) -> np.ndarray:
    vec = np.asarray(x, dtype=float).reshape(-1)
    if d is not None and vec.shape[0] != d:
        raise DimensionMismatchError(f"expected a point in R^{d}, got dimension {vec.shape[0]}")
    if not np.all(np.isfinite(vec)):
        raise ConfigError(f"point has non-finite coordinates: {vec}")
    return vec


def _as_points(X: Sequence | np.ndarray, d: int) -> np.ndarray:
    pts = np.asarray(X, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, d) if d == 1 else pts.reshape(1, -1)
    if pts.shape[1] != d:
        raise DimensionMismatchError(f"expected points in R^{d}, got dimension {pts.shape[1]}")
    return pts


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


# ---------------------------------------------------------------------------
# Halfspaces and polytopes
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Halfspace:
    """The set {x : normal · x <= offset}, normal scaled to unit length."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        a = _as_vector(self.normal).copy()
        length = float(np.linalg.norm(a))
        if length == 0.0:
            raise ConfigError("halfspace normal must be non-zero")
        b = float(self.offset)
        # Already-unit normals (e.g. read back from JSON) are stored untouched
        if abs(length - 1.0) > 4e-16 * a.shape[0]:
            a = a / length
            b = b / length
        a.setflags(write=False)
        object.__setattr__(self, "normal", a)
        object.__setattr__(self, "offset", b)

    @property
    def dimension(self) -> int:
        return self.normal.shape[0]

    def to_dict(self) -> dict:
        return {"normal": [float(v) for v in self.normal], "offset": float(self.offset)}


def halfspace_contains(h: Halfspace, x, tol: float = HALFSPACE_TOLERANCE) -> bool:
    """True iff a·x <= b + tol·max(1, |b|, ‖x‖)."""
    vec = _as_vector(x, h.dimension)
    scale = max(1.0, abs(h.offset), float(np.linalg.norm(vec)))
    return bool(float(h.normal @ vec) <= h.offset + tol * scale)


def _contains_matrix(
    A: np.ndarray, b: np.ndarray, X: np.ndarray, tol: float = HALFSPACE_TOLERANCE
) -> np.ndarray:
    if A.shape[0] == 0:
        return np.ones(X.shape[0], dtype=bool)
    lhs = X @ A.T
    scale = np.maximum(
        1.0, np.maximum(np.abs(b)[None, :], np.linalg.norm(X, axis=1)[:, None])
    )
    return np.all(lhs <= b[None, :] + tol * scale, axis=1)


@dataclass(frozen=True, eq=False)
class Polytope:
    """
    Intersection of halfspaces, with an optional vertex cache for d <= 3.

    An empty halfspace list is the whole space. `bounded` is true exactly when
    the vertex cache is present or the system was proven bounded by LP.
    """

    halfspaces: tuple[Halfspace, ...]
    dimension: int
    vertices: np.ndarray | None = None
    bounded: bool = False
    A: np.ndarray = field(init=False, repr=False)
    b: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        hs = tuple(self.halfspaces)
        for h in hs:
            if h.dimension != self.dimension:
                raise DimensionMismatchError(
                    f"halfspace in R^{h.dimension} inside a polytope in R^{self.dimension}"
                )
        object.__setattr__(self, "halfspaces", hs)
        if hs:
            A = np.vstack([h.normal for h in hs])
            b = np.array([h.offset for h in hs])
        else:
            A = np.zeros((0, self.dimension))
            b = np.zeros(0)
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

        if self.vertices is not None:
            V = np.array(self.vertices, dtype=float).reshape(-1, self.dimension)
            if not self.bounded:
                raise ConfigError("a vertex cache is only valid for bounded polytopes")
            if not np.all(_contains_matrix(A, b, V, tol=1e-9)):
                raise ConfigError("cached vertices violate the polytope's halfspaces")
            V.setflags(write=False)
            object.__setattr__(self, "vertices", V)

    @property
    def facet_count(self) -> int:
        return len(self.halfspaces)

    def contains(self, x, tol: float = HALFSPACE_TOLERANCE) -> bool:
        vec = _as_vector(x, self.dimension)
        return bool(_contains_matrix(self.A, self.b, vec[None, :], tol)[0])

    def contains_many(self, X, tol: float = HALFSPACE_TOLERANCE) -> np.ndarray:
        return _contains_matrix(self.A, self.b, _as_points(X, self.dimension), tol)

    def exit_distances(self, origin: np.ndarray, U: np.ndarray) -> np.ndarray:
        """Distance from an interior origin to the boundary along each row of U."""
        AU = U @ self.A.T
        slack = self.b - self.A @ origin
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(AU > 0, slack[None, :] / AU, np.inf)
        return ratios.min(axis=1) if ratios.shape[1] else np.full(U.shape[0], np.inf)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.bounded:
            raise UnboundedBodyError("polytope is unbounded")
        if self.vertices is not None:
            return self.vertices.min(axis=0), self.vertices.max(axis=0)
        return _lp_box(self.A, self.b)

    def to_dict(self) -> dict:
        payload = {
            "dimension": self.dimension,
            "bounded": self.bounded,
            "halfspaces": [h.to_dict() for h in self.halfspaces],
        }
        if self.vertices is not None:
            payload["vertices"] = [[float(v) for v in row] for row in self.vertices]
        return payload

    @classmethod
    def from_dict(cls, payload: dict) -> "Polytope":
        d = int(payload["dimension"])
        halfspaces = tuple(
            Halfspace(np.array(h["normal"], dtype=float), float(h["offset"]))
            for h in payload["halfspaces"]
        )
        vertices = payload.get("vertices")
        return cls(
            halfspaces=halfspaces,
            dimension=d,
            vertices=None if vertices is None else np.array(vertices, dtype=float),
            bounded=bool(payload.get("bounded", vertices is not None)),
        )

    @classmethod
    def whole_space(cls, d: int) -> "Polytope":
        return cls(halfspaces=(), dimension=d)

    @classmethod
    def box(cls, lo, hi) -> "Polytope":
        lo = _as_vector(lo)
        hi = _as_vector(hi, lo.shape[0])
        if np.any(hi <= lo):
            raise DegenerateGeometryError(f"box has empty interior: lo={lo}, hi={hi}")
        d = lo.shape[0]
        halfspaces = []
        for k in range(d):
            e = np.zeros(d)
            e[k] = 1.0
            halfspaces.append(Halfspace(e, hi[k]))
            halfspaces.append(Halfspace(-e, -lo[k]))
        corners = np.array(np.meshgrid(*[[lo[k], hi[k]] for k in range(d)], indexing="ij"))
        vertices = corners.reshape(d, -1).T if d <= MAX_APPROX_DIMENSION else None
        return cls(tuple(halfspaces), d, vertices=vertices, bounded=True)

    @classmethod
    def from_points(cls, points) -> "Polytope":
        """Convex hull of a point cloud in facet form (d <= 3)."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        d = pts.shape[1]
        if d > MAX_APPROX_DIMENSION:
            raise ConfigError(f"hull-to-halfspace conversion is supported for d <= 3, got d={d}")
        if pts.shape[0] < d + 1:
            raise DegenerateGeometryError(f"{pts.shape[0]} points cannot span R^{d}")

        if d == 1:
            lo, hi = float(pts.min()), float(pts.max())
            if hi - lo <= 0.0:
                raise DegenerateGeometryError("all points coincide")
            return cls(
                (Halfspace(np.array([1.0]), hi), Halfspace(np.array([-1.0]), -lo)),
                1,
                vertices=np.array([[lo], [hi]]),
                bounded=True,
            )

        try:
            hull = ConvexHull(pts)
        except QhullError as exc:
            raise DegenerateGeometryError(f"hull is degenerate: {exc}") from exc
        if hull.volume <= 0.0:
            raise DegenerateGeometryError("hull has zero volume")

        halfspaces = tuple(
            Halfspace(normal, offset) for normal, offset in _merge_coplanar_facets(hull)
        )
        vertices = hull.points[hull.vertices]
        return cls(halfspaces, d, vertices=vertices, bounded=True)

    @classmethod
    def from_halfspaces(cls, normals, offsets) -> "Polytope":
        """
        Polytope from raw inequalities.

        Bounded systems in d <= 3 get their vertices recovered through a
        Chebyshev centre and halfspace intersection; halfspaces touched by
        fewer than d vertices are redundant and dropped. Unbounded systems are
        kept as given.
        """
        A = np.atleast_2d(np.asarray(normals, dtype=float))
        b = np.asarray(offsets, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise ConfigError("normals and offsets differ in length")
        d = A.shape[1]
        halfspaces = _dedupe_halfspaces([Halfspace(a, o) for a, o in zip(A, b, strict=True)])
        if not halfspaces:
            return cls.whole_space(d)
        A = np.vstack([h.normal for h in halfspaces])
        b = np.array([h.offset for h in halfspaces])

        centre, radius = chebyshev_center(A, b)
        if radius <= 0.0:
            raise DegenerateGeometryError("halfspace system has empty interior")
        if not _lp_is_bounded(A, b):
            return cls(tuple(halfspaces), d, bounded=False)
        if d > MAX_APPROX_DIMENSION:
            return cls(tuple(halfspaces), d, bounded=True)

        if d == 1:
            lo, hi = _lp_box(A, b)
            return cls.from_points(np.array([lo, hi]))

        try:
            intersection = HalfspaceIntersection(np.hstack([A, -b[:, None]]), centre)
        except QhullError as exc:
            raise DegenerateGeometryError(f"halfspace intersection failed: {exc}") from exc
        vertices = np.unique(np.round(intersection.intersections, 13), axis=0)
        touching = np.abs(vertices @ A.T - b[None, :]) <= 1e-9 * np.maximum(1.0, np.abs(b))
        keep = [h for h, count in zip(halfspaces, touching.sum(axis=0), strict=True) if count >= d]
        return cls(tuple(keep), d, vertices=vertices, bounded=True)


def _dedupe_halfspaces(halfspaces: list[Halfspace]) -> list[Halfspace]:
    unique: list[Halfspace] = []
    for h in halfspaces:
        same = any(
            np.allclose(h.normal, g.normal, atol=1e-12) and abs(h.offset - g.offset) <= 1e-12
            for g in unique
        )
        if not same:
            unique.append(h)
    return unique


def _merge_coplanar_facets(hull: ConvexHull) -> list[tuple[np.ndarray, float]]:
    """
    Collapse qhull's simplicial facets into true facets.

    Simplices are graph nodes; neighbouring simplices with matching plane
    equations are joined, and each connected component is one facet.
    """
    equations = hull.equations
    d = equations.shape[1] - 1
    scale = max(1.0, float(np.abs(equations[:, -1]).max()))
    graph = nx.Graph()
    graph.add_nodes_from(range(equations.shape[0]))
    for i, neighbours in enumerate(hull.neighbors):
        for j in neighbours:
            if j > i and np.allclose(
                equations[i], equations[j], atol=COPLANAR_TOLERANCE * scale, rtol=0.0
            ):
                graph.add_edge(i, int(j))

    facets = []
    for component in sorted(nx.connected_components(graph), key=min):
        rows = equations[sorted(component)]
        normal = rows[:, :d].mean(axis=0)
        length = float(np.linalg.norm(normal))
        # qhull stores n·x + c <= 0
        facets.append((normal / length, float(-rows[:, d].mean() / length)))
    return facets


def chebyshev_center(A: np.ndarray, b: np.ndarray, cap: float = 1e9) -> tuple[np.ndarray, float]:
    """
    Centre and radius of the largest ball inside {x : Ax <= b}.

    Radius is capped; a capped radius means the region contains arbitrarily
    large balls. Infeasible systems return radius -1.
    """
    d = A.shape[1]
    norms = np.linalg.norm(A, axis=1)
    c = np.zeros(d + 1)
    c[-1] = -1.0
    A_ub = np.hstack([A, norms[:, None]])
    bounds = [(None, None)] * d + [(0.0, cap)]
    result = linprog(c, A_ub=A_ub, b_ub=b, bounds=bounds, method="highs")
    if result.status != 0:
        return np.zeros(d), -1.0
    return result.x[:d], float(result.x[-1])


def _lp_is_bounded(A: np.ndarray, b: np.ndarray) -> bool:
    d = A.shape[1]
    for k in range(d):
        for sign in (1.0, -1.0):
            c = np.zeros(d)
            c[k] = -sign
            result = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * d, method="highs")
            if result.status == 3:
                return False
    return True


def _lp_box(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d = A.shape[1]
    lo, hi = np.zeros(d), np.zeros(d)
    for k in range(d):
        c = np.zeros(d)
        c[k] = 1.0
        low = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * d, method="highs")
        high = linprog(-c, A_ub=A, b_ub=b, bounds=[(None, None)] * d, method="highs")
        if low.status != 0 or high.status != 0:
            raise UnboundedBodyError("polytope has no finite bounding box")
        lo[k], hi[k] = low.fun, -high.fun
    return lo, hi


def polytope_contains(P: Polytope, x, tol: float = HALFSPACE_TOLERANCE) -> bool:
    """Conjunction of halfspace_contains over all facets (true for the whole space)."""
    return P.contains(x, tol)


def polygon_area(vertices: np.ndarray) -> float:
    """Shoelace area of a convex vertex set, ordered by angle about its centroid."""
    V = np.asarray(vertices, dtype=float)
    centroid = V.mean(axis=0)
    order = np.argsort(np.arctan2(V[:, 1] - centroid[1], V[:, 0] - centroid[0]))
    x, y = V[order, 0], V[order, 1]
    return float(0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)))


# ---------------------------------------------------------------------------
# Convex bodies and set predicates
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConvexBody:
    """
    Bounded convex set given by a vectorized membership oracle.

    `membership` maps an (N, d) array to N booleans. `exact_volume` is set when
    the volume is known analytically; `radius` is a characteristic size used to
    flag degenerate bodies.
    """

    dimension: int
    membership: Membership
    interior_point: np.ndarray
    bounding_box: tuple[np.ndarray, np.ndarray]
    exact_volume: float | None = None
    polytope: Polytope | None = None
    radius: float | None = None
    label: str = "body"

    def contains(self, x) -> bool:
        vec = _as_vector(x, self.dimension)
        return bool(self.membership(vec[None, :])[0])

    def contains_many(self, X) -> np.ndarray:
        return np.asarray(self.membership(_as_points(X, self.dimension)), dtype=bool)

    @property
    def is_degenerate(self) -> bool:
        return self.exact_volume == 0.0 or (self.radius is not None and self.radius <= 0.0)

    @classmethod
    def ball(cls, center, radius: float) -> "ConvexBody":
        c = _as_vector(center)
        d = c.shape[0]
        r = float(radius)
        if r < 0:
            raise ConfigError(f"radius must be non-negative, got {r}")
        r2 = r * r
        slack = HALFSPACE_TOLERANCE * max(1.0, r2)

        def membership(X: np.ndarray) -> np.ndarray:
            return np.sum((X - c) ** 2, axis=1) <= r2 + slack

        return cls(
            dimension=d,
            membership=membership,
            interior_point=c,
            bounding_box=(c - r, c + r),
            exact_volume=unit_ball_volume(d) * r**d,
            radius=r,
            label=f"ball(r={r:g})",
        )

    @classmethod
    def ellipsoid(cls, center, shape, radius: float = 1.0) -> "ConvexBody":
        """{x : (x - c)^T shape^{-1} (x - c) <= radius^2} for a positive-definite shape."""
        c = _as_vector(center)
        d = c.shape[0]
        S = np.atleast_2d(np.asarray(shape, dtype=float))
        if S.shape != (d, d):
            raise DimensionMismatchError(f"shape matrix must be {d}x{d}, got {S.shape}")
        try:
            np.linalg.cholesky(S)
        except np.linalg.LinAlgError as exc:
            raise ConfigError("ellipsoid shape must be positive definite") from exc
        S_inv = np.linalg.inv(S)
        r = float(radius)
        r2 = r * r
        slack = HALFSPACE_TOLERANCE * max(1.0, r2)

        def membership(X: np.ndarray) -> np.ndarray:
            Z = X - c
            return np.einsum("ij,jk,ik->i", Z, S_inv, Z) <= r2 + slack

        half_widths = r * np.sqrt(np.diag(S))
        return cls(
            dimension=d,
            membership=membership,
            interior_point=c,
            bounding_box=(c - half_widths, c + half_widths),
            exact_volume=unit_ball_volume(d) * r**d * math.sqrt(float(np.linalg.det(S))),
            radius=r * math.sqrt(float(np.linalg.eigvalsh(S).min())),
            label=f"ellipsoid(r={r:g})",
        )

    @classmethod
    def from_polytope(cls, P: Polytope, label: str = "polytope") -> "ConvexBody":
        if not P.bounded or P.vertices is None:
            raise UnboundedBodyError("body needs a bounded polytope with a vertex cache")
        if P.dimension == 1:
            exact = float(P.vertices.max() - P.vertices.min())
        elif P.dimension == 2:
            exact = polygon_area(P.vertices)
        else:
            exact = None
        lo, hi = P.bounding_box()
        return cls(
            dimension=P.dimension,
            membership=P.contains_many,
            interior_point=P.vertices.mean(axis=0),
            bounding_box=(lo, hi),
            exact_volume=exact,
            polytope=P,
            label=label,
        )

    @classmethod
    def box(cls, lo, hi) -> "ConvexBody":
        P = Polytope.box(lo, hi)
        lo_hi = P.bounding_box()
        return replace(
            cls.from_polytope(P, label="box"),
            interior_point=0.5 * (lo_hi[0] + lo_hi[1]),
            exact_volume=float(np.prod(lo_hi[1] - lo_hi[0])),
        )

    @classmethod
    def polygon(cls, vertices) -> "ConvexBody":
        return cls.from_polytope(Polytope.from_points(vertices), label="polygon")


class BodyCheck(NamedTuple):
    """Spot checks of a body's structural promises."""

    interior_ok: bool
    box_ok: bool
    convex_ok: bool
    members_sampled: int


def spot_check_body(K: ConvexBody, n: int = 4_000, seed: SeedLike = 0) -> BodyCheck:
    """
    Check the interior point, the bounding box and midpoint convexity.

    The box is tested by sampling a 20%-enlarged box: no member may fall
    outside the advertised box.
    """
    rng = make_rng(seed)
    lo, hi = K.bounding_box
    pad = 0.2 * np.maximum(hi - lo, 1e-12)
    X = rng.uniform(lo - pad, hi + pad, size=(n, K.dimension))
    inside = K.contains_many(X)
    outside_box = np.any((X < lo) | (X > hi), axis=1)
    members = X[inside]
    convex_ok = True
    if members.shape[0] >= 2:
        pairs = rng.integers(0, members.shape[0], size=(min(n, 4 * members.shape[0]), 2))
        mids = 0.5 * (members[pairs[:, 0]] + members[pairs[:, 1]])
        convex_ok = bool(np.all(K.contains_many(mids)))
    return BodyCheck(
        interior_ok=K.contains(K.interior_point),
        box_ok=not bool(np.any(inside & outside_box)),
        convex_ok=convex_ok,
        members_sampled=int(members.shape[0]),
    )


@dataclass(frozen=True, eq=False)
class SetPredicate:
    """
    Measurable set given by a vectorized membership test.

    In d = 1 a set may also carry its exact form as closed intervals, which
    enables exact integration of piecewise-constant densities.
    """

    dimension: int
    membership: Membership
    label: str = "set"
    intervals: tuple[tuple[float, float], ...] | None = None

    def contains(self, x) -> bool:
        vec = _as_vector(x, self.dimension)
        return bool(self.membership(vec[None, :])[0])

    def contains_many(self, X) -> np.ndarray:
        return np.asarray(self.membership(_as_points(X, self.dimension)), dtype=bool)


def interval_set(lo: float, hi: float, label: str | None = None) -> SetPredicate:
    """Closed interval [lo, hi] in R^1 (infinite ends allowed)."""
    if hi < lo:
        return empty_set(1)

    def membership(X: np.ndarray) -> np.ndarray:
        return (X[:, 0] >= lo) & (X[:, 0] <= hi)

    return SetPredicate(1, membership, label or f"[{lo:g}, {hi:g}]", ((float(lo), float(hi)),))


def intervals_set(intervals: Sequence[tuple[float, float]], label: str = "intervals") -> SetPredicate:
    """Finite union of closed intervals in R^1."""
    spans = tuple(sorted((float(a), float(b)) for a, b in intervals if b >= a))
    if not spans:
        return empty_set(1)
    lows = np.array([a for a, _ in spans])
    highs = np.array([b for _, b in spans])

    def membership(X: np.ndarray) -> np.ndarray:
        x = X[:, 0][:, None]
        return np.any((x >= lows[None, :]) & (x <= highs[None, :]), axis=1)

    return SetPredicate(1, membership, label, spans)


def whole_space(d: int) -> SetPredicate:
    intervals = ((-math.inf, math.inf),) if d == 1 else None
    return SetPredicate(d, lambda X: np.ones(X.shape[0], dtype=bool), "whole space", intervals)


def empty_set(d: int) -> SetPredicate:
    intervals = () if d == 1 else None
    return SetPredicate(d, lambda X: np.zeros(X.shape[0], dtype=bool), "empty", intervals)


def polytope_set(P: Polytope, label: str = "polytope") -> SetPredicate:
    intervals = None
    if P.dimension == 1:
        lo, hi = -math.inf, math.inf
        for h in P.halfspaces:
            if h.normal[0] > 0:
                hi = min(hi, h.offset / h.normal[0])
            else:
                lo = max(lo, h.offset / h.normal[0])
        intervals = ((lo, hi),) if hi >= lo else ()
    return SetPredicate(P.dimension, P.contains_many, label, intervals)


def union_of(sets: Sequence[SetPredicate], d: int, label: str = "union") -> SetPredicate:
    members = list(sets)
    if not members:
        return empty_set(d)
    for s in members:
        if s.dimension != d:
            raise DimensionMismatchError(f"set in R^{s.dimension} inside a union in R^{d}")

    def membership(X: np.ndarray) -> np.ndarray:
        result = np.zeros(X.shape[0], dtype=bool)
        for s in members:
            result |= s.contains_many(X)
        return result

    intervals = None
    if d == 1 and all(s.intervals is not None for s in members):
        intervals = _merge_intervals([iv for s in members for iv in s.intervals])
    return SetPredicate(d, membership, label, intervals)


def _merge_intervals(spans: Sequence[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    merged: list[list[float]] = []
    for a, b in sorted(spans):
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return tuple((a, b) for a, b in merged)


# ---------------------------------------------------------------------------
# Directions, rays and inscribed polytopes
# ---------------------------------------------------------------------------

DIRECTION_SCHEMES = ("axis", "uniform-angle", "fibonacci-sphere", "quasi-random", "random")


def default_scheme(d: int) -> str:
    return {1: "axis", 2: "uniform-angle", 3: "fibonacci-sphere"}.get(d, "quasi-random")


def sphere_directions(
    d: int, m: int, scheme: str | None = None, seed: SeedLike = 0, phase: float = 0.0
) -> np.ndarray:
    """
    m unit vectors in R^d.

    Args:
        d: Dimension
        m: Number of directions (at least d + 1)
        scheme: "axis" (d=1, alternating ±1), "uniform-angle" (d=2, angles
            phase + 2πj/m), "fibonacci-sphere" (d=3), "quasi-random"
            (normalized scrambled-Halton Gaussians, any d) or "random"
        seed: Seed for the randomized schemes
        phase: Rotation offset for the deterministic planar and spherical schemes

    Returns:
        (m, d) array of unit rows
    """
    if d < 1:
        raise ConfigError(f"dimension must be >= 1, got {d}")
    if m < d + 1:
        raise ConfigError(f"{m} directions cannot positively span R^{d} (need at least {d + 1})")
    scheme = scheme or default_scheme(d)
    if scheme not in DIRECTION_SCHEMES:
        raise ConfigError(f"unknown direction scheme {scheme!r}")

    if scheme == "axis":
        if d != 1:
            raise ConfigError("scheme 'axis' is for d = 1")
        return np.where(np.arange(m) % 2 == 0, 1.0, -1.0).reshape(-1, 1)
    if scheme == "uniform-angle":
        if d != 2:
            raise ConfigError("scheme 'uniform-angle' is for d = 2")
        angles = phase + 2.0 * np.pi * np.arange(m) / m
        return np.column_stack([np.cos(angles), np.sin(angles)])
    if scheme == "fibonacci-sphere":
        if d != 3:
            raise ConfigError("scheme 'fibonacci-sphere' is for d = 3")
        j = np.arange(m)
        z = 1.0 - (2.0 * j + 1.0) / m
        rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
        theta = phase + j * np.pi * (3.0 - math.sqrt(5.0))
        U = np.column_stack([rho * np.cos(theta), rho * np.sin(theta), z])
    elif scheme == "quasi-random":
        seed_int = int(make_rng(seed).integers(2**32))
        u = qmc.Halton(d, scramble=True, seed=seed_int).random(m)
        U = norm.ppf(np.clip(u, 1e-12, 1.0 - 1e-12))
    else:
        U = make_rng(seed).standard_normal((m, d))
    return U / np.linalg.norm(U, axis=1, keepdims=True)


def _box_exit_distances(origin: np.ndarray, U: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    with np.errstate(divide="ignore", invalid="ignore"):
        t_hi = np.where(U > 0, (hi - origin) / U, np.where(U < 0, (lo - origin) / U, np.inf))
    return t_hi.min(axis=1)


def ray_boundaries(
    K: ConvexBody, origin, U: np.ndarray, tol: float = RAY_TOLERANCE
) -> np.ndarray:
    """
    Boundary points of K along many rays from one interior origin.

    Bracketing against the bounding box, then vectorized bisection. Returned
    points are on the member side, within tol of the boundary. Polytope bodies
    use their exact exit distances instead.
    """
    o = _as_vector(origin, K.dimension)
    U = _as_points(U, K.dimension)
    if not K.contains(o):
        raise GeometryError(f"ray origin {o} is not inside {K.label}")
    lo, hi = (np.asarray(v, dtype=float) for v in K.bounding_box)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise UnboundedBodyError(f"{K.label} has no finite bounding box")

    if K.polytope is not None:
        t = K.polytope.exit_distances(o, U)
        if not np.all(np.isfinite(t)):
            raise UnboundedBodyError(f"a ray never leaves {K.label}")
        return o + t[:, None] * U

    t_box = _box_exit_distances(o, U, lo, hi)
    t_out = t_box * (1.0 + 1e-9) + 10 * tol
    still_inside = K.contains_many(o + t_out[:, None] * U)
    if np.any(still_inside):
        raise UnboundedBodyError(f"a ray never exits the bounding box of {K.label}")

    t_lo = np.zeros(U.shape[0])
    t_hi = t_out
    steps = max(1, math.ceil(math.log2(max(float(t_hi.max()), tol) / tol)))
    for _ in range(steps):
        mid = 0.5 * (t_lo + t_hi)
        inside = K.contains_many(o + mid[:, None] * U)
        t_lo = np.where(inside, mid, t_lo)
        t_hi = np.where(inside, t_hi, mid)
    return o + t_lo[:, None] * U


def ray_boundary(K: ConvexBody, origin, u, tol: float = RAY_TOLERANCE) -> np.ndarray:
    """Boundary point of K on the ray origin + t·u, t >= 0."""
    direction = _as_vector(u, K.dimension)
    length = float(np.linalg.norm(direction))
    if length == 0.0:
        raise GeometryError("ray direction must be non-zero")
    return ray_boundaries(K, origin, (direction / length)[None, :], tol)[0]


def inscribed_polytope(
    K: ConvexBody,
    m: int,
    seed: SeedLike = 0,
    tol: float = RAY_TOLERANCE,
    scheme: str | None = None,
    directions: np.ndarray | None = None,
) -> Polytope:
    """
    Polytope inscribed in K: hull of m boundary points found along sphere directions.

    Every vertex is a member of K, so convexity of K gives P ⊆ K.

    Args:
        K: Bounded convex body with an interior point
        m: Number of directions (>= d + 1)
        seed: Seed for randomized direction schemes
        tol: Ray bisection tolerance
        scheme: Direction scheme (default per dimension)
        directions: Explicit direction rows, overriding m and scheme

    Returns:
        Polytope in facet form with a vertex cache
    """
    d = K.dimension
    if d > MAX_APPROX_DIMENSION:
        raise ConfigError(f"inscribed polytopes are built for d <= 3, got d={d}")
    if directions is None:
        U = sphere_directions(d, m, scheme, seed)
    else:
        U = _as_points(directions, d)
        U = U / np.linalg.norm(U, axis=1, keepdims=True)
        if U.shape[0] < d + 1:
            raise ConfigError(f"{U.shape[0]} directions cannot positively span R^{d}")
    if K.is_degenerate:
        raise DegenerateGeometryError(f"{K.label} has empty interior")
    points = ray_boundaries(K, K.interior_point, U, tol)
    return Polytope.from_points(points)


# ---------------------------------------------------------------------------
# Volumes and sampling
# ---------------------------------------------------------------------------


class VolumeEstimate(NamedTuple):
    """Lebesgue volume with its standard error."""

    value: float
    stderr: float
    method: str  # exact-1d | exact-2d | analytic | monte-carlo
    sample_count: int = 0


class DeficitEstimate(NamedTuple):
    """Relative volume deficit 1 - vol(P)/vol(K)."""

    value: float
    stderr: float
    method: str


VOLUME_METHODS = ("exact-1d", "exact-2d", "analytic", "monte-carlo")


def _body_parts(B: ConvexBody | Polytope):
    if isinstance(B, Polytope):
        lo, hi = B.bounding_box()
        return B.dimension, B.contains_many, lo, hi, B.vertices, None
    lo, hi = (np.asarray(v, dtype=float) for v in B.bounding_box)
    vertices = B.polytope.vertices if B.polytope is not None else None
    return B.dimension, B.contains_many, lo, hi, vertices, B.exact_volume


def mc_hit_count(
    predicate: Membership, lo: np.ndarray, hi: np.ndarray, n: int, seed: SeedLike
) -> int:
    """
    Hits of a predicate among n uniform points of the box [lo, hi].

    The budget is split into fixed chunks with their own SeedSequence streams,
    so the count depends on the seed only, never on the worker count.
    """
    sizes = chunk_sizes(n)
    seeds = spawn_seeds(seed, len(sizes))
    d = lo.shape[0]

    def make_task(size: int, child):
        def task() -> int:
            X = make_rng(child).uniform(lo, hi, size=(size, d))
            return int(np.count_nonzero(predicate(X)))

        return task

    return sum(run_ordered([make_task(s, c) for s, c in zip(sizes, seeds, strict=True)]))


def volume(
    B: ConvexBody | Polytope,
    method: str | None = None,
    mc_samples: int = DEFAULT_MC_BUDGET,
    seed: SeedLike = 0,
) -> VolumeEstimate:
    """
    Volume of a bounded body or polytope.

    Args:
        B: Body or bounded polytope
        method: exact-1d, exact-2d, analytic or monte-carlo (default: the
            most exact one available)
        mc_samples: Sample count for monte-carlo
        seed: Seed for monte-carlo

    Returns:
        VolumeEstimate; stderr is 0 for every non-random method
    """
    d, predicate, lo, hi, vertices, exact = _body_parts(B)
    if method is None:
        if d == 1 and vertices is not None:
            method = "exact-1d"
        elif d == 2 and vertices is not None:
            method = "exact-2d"
        elif exact is not None:
            method = "analytic"
        else:
            method = "monte-carlo"
    if method not in VOLUME_METHODS:
        raise ConfigError(f"unknown volume method {method!r}")

    if method == "exact-1d":
        if d != 1:
            raise ConfigError(f"exact-1d volume requested for d={d}")
        if vertices is None:
            if exact is None:
                raise ConfigError("exact-1d volume needs a vertex cache")
            return VolumeEstimate(float(exact), 0.0, "exact-1d")
        return VolumeEstimate(float(vertices.max() - vertices.min()), 0.0, "exact-1d")
    if method == "exact-2d":
        if d != 2:
            raise ConfigError(f"exact-2d volume requested for d={d}")
        if vertices is None:
            raise ConfigError("exact-2d volume needs a vertex cache")
        return VolumeEstimate(polygon_area(vertices), 0.0, "exact-2d")
    if method == "analytic":
        if exact is None:
            raise ConfigError("no analytic volume is known for this body")
        return VolumeEstimate(float(exact), 0.0, "analytic")

    if mc_samples < 1:
        raise ConfigError("monte-carlo volume needs at least one sample")
    box_volume = float(np.prod(hi - lo))
    if box_volume == 0.0:
        return VolumeEstimate(0.0, 0.0, "monte-carlo", mc_samples)
    hits = mc_hit_count(predicate, lo, hi, mc_samples, seed)
    p = hits / mc_samples
    return VolumeEstimate(
        box_volume * p,
        box_volume * math.sqrt(p * (1.0 - p) / mc_samples),
        "monte-carlo",
        mc_samples,
    )


def volume_deficit(
    K: ConvexBody,
    P: Polytope,
    mc_samples: int = DEFAULT_MC_BUDGET,
    seed: SeedLike = 0,
) -> DeficitEstimate:
    """
    Relative deficit vol(K \\ P) / vol(K) of an inscribed polytope.

    Exact when both volumes are exactly known (d <= 2 with an analytic body);
    otherwise the difference region K \\ P is counted directly by Monte Carlo,
    which keeps the error proportional to the deficit itself.
    """
    if K.dimension != P.dimension:
        raise DimensionMismatchError("body and polytope dimensions differ")
    if K.exact_volume is not None and K.exact_volume > 0 and P.vertices is not None:
        if P.dimension == 1:
            inner = float(P.vertices.max() - P.vertices.min())
            return DeficitEstimate(max(0.0, 1.0 - inner / K.exact_volume), 0.0, "exact-1d")
        if P.dimension == 2:
            inner = polygon_area(P.vertices)
            return DeficitEstimate(max(0.0, 1.0 - inner / K.exact_volume), 0.0, "exact-2d")

    lo, hi = (np.asarray(v, dtype=float) for v in K.bounding_box)
    box_volume = float(np.prod(hi - lo))

    def outside_polytope(X: np.ndarray) -> np.ndarray:
        inside = K.contains_many(X)
        inside[inside] = ~P.contains_many(X[inside])
        return inside

    hits = mc_hit_count(outside_polytope, lo, hi, mc_samples, seed)
    p = hits / mc_samples
    missing = box_volume * p
    missing_err = box_volume * math.sqrt(p * (1.0 - p) / mc_samples)
    if K.exact_volume is not None and K.exact_volume > 0:
        whole = VolumeEstimate(K.exact_volume, 0.0, "analytic")
    else:
        whole = volume(K, "monte-carlo", mc_samples, seed)
    if whole.value <= 0:
        raise DegenerateGeometryError(f"{K.label} has zero volume")
    ratio = missing / whole.value
    stderr = math.hypot(missing_err / whole.value, ratio * whole.stderr / whole.value)
    return DeficitEstimate(ratio, stderr, "monte-carlo")


def rejection_sample(
    contains: Membership,
    lo: np.ndarray,
    hi: np.ndarray,
    n: int,
    rng: np.random.Generator,
    floor: float = REJECTION_ACCEPTANCE_FLOOR,
) -> tuple[np.ndarray, float]:
    """
    Uniform points of a region by rejection from its bounding box.

    Returns:
        (points, acceptance_rate) with points of shape (n, d)
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    d = lo.shape[0]
    accepted: list[np.ndarray] = []
    have = proposed = hits = 0
    batch = max(1_024, 2 * n)
    for _ in range(REJECTION_MAX_ROUNDS):
        X = rng.uniform(lo, hi, size=(batch, d))
        keep = X[contains(X)]
        proposed += batch
        hits += keep.shape[0]
        accepted.append(keep)
        have += keep.shape[0]
        rate = hits / proposed
        if rate < floor:
            raise SamplerError(
                f"rejection acceptance rate {rate:.2e} is below the floor {floor:.0e}"
            )
        if have >= n:
            break
        batch = max(1_024, int(1.2 * (n - have) / rate) + 1)
    else:
        raise SamplerError(f"rejection sampler produced {have} of {n} points")
    logger.debug("rejection sampler acceptance rate %.4f over %d proposals", rate, proposed)
    return np.concatenate(accepted)[:n], rate


def sample_in_polytope(P: Polytope, n: int, seed: SeedLike = 0) -> np.ndarray:
    """Uniform points inside a bounded polytope."""
    lo, hi = P.bounding_box()
    points, _ = rejection_sample(P.contains_many, lo, hi, n, make_rng(seed))
    return points
