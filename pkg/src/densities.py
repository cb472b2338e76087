#!/usr/bin/env python3
"""
ABOUTME: Log-concave density families with exact evaluation, sampling and level-set oracles
ABOUTME: Gaussian, uniform-convex, product exponential/Laplace, generic potentials and contaminated mixtures
"""

import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Callable
from typing import Any, Protocol

import numpy as np
from scipy import stats

from geometry import (
    ConvexBody,
    Halfspace,
    Polytope,
    rejection_sample,
    volume,
)
from lab_config import DEFAULT_MC_BUDGET, GRID_TAIL_MASS, RAY_TOLERANCE
from lab_errors import (
    ConfigError,
    DegenerateGeometryError,
    DimensionMismatchError,
    LabError,
    LevelSetError,
    SamplerError,
    UnboundedBodyError,
)
from lab_utils import SeedLike, make_rng, spawn_seeds


logger = logging.getLogger(__name__)

FAMILY_TAGS = (
    "gaussian",
    "uniform-convex",
    "product-exponential",
    "product-laplace",
    "generic",
)


class EvaluableDensity(Protocol):
    """What metrics and selection need from any density-like object."""

    dimension: int
    has_sampler: bool
    is_piecewise_constant: bool

    def pdf(self, X: np.ndarray) -> np.ndarray: ...

    def sample(self, n: int, seed: SeedLike = 0) -> np.ndarray: ...

    def bounding_box(self, mass_out: float = GRID_TAIL_MASS) -> tuple[np.ndarray, np.ndarray]: ...

    def breakpoints_1d(self) -> list[float]: ...


def as_points(X, d: int) -> np.ndarray:
    pts = np.asarray(X, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1) if d == 1 else pts.reshape(1, -1)
    if pts.shape[1] != d:
        raise DimensionMismatchError(f"expected points in R^{d}, got dimension {pts.shape[1]}")
    return pts


def _point_body(point: np.ndarray) -> ConvexBody:
    """The single point {point}: the top level set of a density with a strict maximum."""

    def membership(X: np.ndarray) -> np.ndarray:
        return np.all(np.abs(X - point) <= 1e-12 * np.maximum(1.0, np.abs(point)), axis=1)

    return ConvexBody(
        dimension=point.shape[0],
        membership=membership,
        interior_point=point,
        bounding_box=(point.copy(), point.copy()),
        exact_volume=0.0,
        radius=0.0,
        label="point",
    )


class LogConcaveDensity(ABC):
    """
    Density e^{φ} with φ concave and upper semi-continuous.

    Subclasses supply the potential, the maximum M_f, a mode and the convex
    level sets L_f(y) = {x : f(x) >= y}.
    """

    family_tag = "generic"
    has_sampler = True
    is_piecewise_constant = False
    is_log_concave = True

    def __init__(self, dimension: int):
        if isinstance(dimension, bool) or not isinstance(dimension, int) or dimension < 1:
            raise ConfigError(f"dimension must be a positive integer, got {dimension!r}")
        self.dimension = dimension

    @abstractmethod
    def log_pdf(self, X: np.ndarray) -> np.ndarray:
        """φ at each row of an (N, d) array; -inf off the support."""

    @property
    @abstractmethod
    def max_value(self) -> float:
        """M_f, the maximum of the density."""

    @property
    @abstractmethod
    def mode(self) -> np.ndarray:
        """A point where the maximum is attained."""

    @abstractmethod
    def _level_body(self, y: float) -> ConvexBody:
        """L_f(y) for 0 < y <= M_f."""

    @abstractmethod
    def bounding_box(self, mass_out: float = GRID_TAIL_MASS) -> tuple[np.ndarray, np.ndarray]:
        """Axis box holding all but (at most) mass_out of the probability."""

    @abstractmethod
    def to_spec(self) -> dict[str, Any]:
        """JSON-ready description in the density specification format."""

    def pdf(self, X) -> np.ndarray:
        with np.errstate(under="ignore"):
            return np.exp(self.log_pdf(as_points(X, self.dimension)))

    def value_at(self, x) -> float:
        """Density at a single point."""
        vec = np.asarray(x, dtype=float).reshape(-1)
        if vec.shape[0] != self.dimension:
            raise DimensionMismatchError(
                f"density lives in R^{self.dimension}, point has dimension {vec.shape[0]}"
            )
        return float(self.pdf(vec[None, :])[0])

    def level_set(self, y: float) -> ConvexBody | None:
        """L_f(y); None when y exceeds the maximum."""
        if not y > 0:
            raise LevelSetError(f"level must be positive, got {y}")
        if y > self.max_value * (1.0 + 1e-12):
            return None
        return self._level_body(min(y, self.max_value))

    def sample(self, n: int, seed: SeedLike = 0) -> np.ndarray:
        if n < 1:
            raise ConfigError(f"sample size must be >= 1, got {n}")
        return self._sample(n, make_rng(seed))

    def _sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise SamplerError(f"{self.family_tag} density has no exact sampler")

    def breakpoints_1d(self) -> list[float]:
        """Points where a 1-D density jumps or has a kink."""
        return []

    def coordinate_distribution(self, k: int):
        """Frozen scipy.stats marginal of coordinate k, when the family has one."""
        return None

    def __repr__(self) -> str:
        return f"{type(self).__name__}(d={self.dimension})"


class GaussianDensity(LogConcaveDensity):
    """N(mean, cov) with a positive-definite covariance."""

    family_tag = "gaussian"

    def __init__(self, mean, cov):
        mu = np.asarray(mean, dtype=float).reshape(-1)
        super().__init__(mu.shape[0])
        sigma = np.atleast_2d(np.asarray(cov, dtype=float))
        if sigma.shape != (self.dimension, self.dimension):
            raise ConfigError(f"covariance must be {self.dimension}x{self.dimension}")
        if not np.allclose(sigma, sigma.T):
            raise ConfigError("covariance must be symmetric")
        try:
            self._chol = np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError as exc:
            raise ConfigError("covariance must be positive definite") from exc
        self.mean = mu
        self.cov = sigma
        self._prec = np.linalg.inv(sigma)
        log_det = 2.0 * float(np.sum(np.log(np.diag(self._chol))))
        self._log_max = -0.5 * self.dimension * math.log(2.0 * math.pi) - 0.5 * log_det

    def log_pdf(self, X) -> np.ndarray:
        Z = as_points(X, self.dimension) - self.mean
        return self._log_max - 0.5 * np.einsum("ij,jk,ik->i", Z, self._prec, Z)

    @property
    def max_value(self) -> float:
        return math.exp(self._log_max)

    @property
    def mode(self) -> np.ndarray:
        return self.mean.copy()

    def _level_body(self, y: float) -> ConvexBody:
        r2 = max(0.0, 2.0 * (self._log_max - math.log(y)))
        if r2 == 0.0 or y >= self.max_value:
            return _point_body(self.mean)
        return ConvexBody.ellipsoid(self.mean, self.cov, math.sqrt(r2))

    def _sample(self, n, rng):
        return self.mean + rng.standard_normal((n, self.dimension)) @ self._chol.T

    def bounding_box(self, mass_out=GRID_TAIL_MASS):
        k = math.sqrt(stats.chi2.isf(mass_out, self.dimension))
        half = k * np.sqrt(np.diag(self.cov))
        return self.mean - half, self.mean + half

    def coordinate_distribution(self, k):
        return stats.norm(loc=self.mean[k], scale=math.sqrt(self.cov[k, k]))

    def to_spec(self):
        return {
            "family": self.family_tag,
            "dimension": self.dimension,
            "params": {"mean": self.mean.tolist(), "cov": self.cov.tolist()},
        }


class UniformConvexDensity(LogConcaveDensity):
    """Uniform density on a bounded convex body with positive volume."""

    family_tag = "uniform-convex"
    is_piecewise_constant = True

    def __init__(self, body: ConvexBody, spec_params: dict | None = None):
        super().__init__(body.dimension)
        if body.exact_volume is not None:
            vol = float(body.exact_volume)
        else:
            estimate = volume(body, "monte-carlo", mc_samples=5 * DEFAULT_MC_BUDGET, seed=0)
            logger.info(
                "uniform body %s has no exact volume, using MC %.6g ± %.2g",
                body.label,
                estimate.value,
                estimate.stderr,
            )
            vol = estimate.value
        if not vol > 0:
            raise DegenerateGeometryError(f"{body.label} has zero volume")
        self.body = body
        self.body_volume = vol
        self._spec_params = spec_params or {"body": body.label}

    def log_pdf(self, X) -> np.ndarray:
        inside = self.body.contains_many(as_points(X, self.dimension))
        return np.where(inside, -math.log(self.body_volume), -np.inf)

    @property
    def max_value(self) -> float:
        return 1.0 / self.body_volume

    @property
    def mode(self) -> np.ndarray:
        return np.asarray(self.body.interior_point, dtype=float).copy()

    def _level_body(self, y: float) -> ConvexBody:
        return self.body

    def sample_with_rate(self, n: int, seed: SeedLike = 0) -> tuple[np.ndarray, float]:
        """Rejection samples from the bounding box together with the acceptance rate."""
        if n < 1:
            raise ConfigError(f"sample size must be >= 1, got {n}")
        return self._rejection(n, make_rng(seed))

    def _rejection(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, float]:
        lo, hi = self.body.bounding_box
        points, rate = rejection_sample(self.body.contains_many, lo, hi, n, rng)
        logger.debug("uniform %s: acceptance rate %.4f", self.body.label, rate)
        return points, rate

    def _sample(self, n, rng):
        return self._rejection(n, rng)[0]

    def bounding_box(self, mass_out=GRID_TAIL_MASS):
        lo, hi = self.body.bounding_box
        return np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)

    def breakpoints_1d(self):
        if self.dimension != 1:
            return []
        lo, hi = self.bounding_box()
        return [float(lo[0]), float(hi[0])]

    def coordinate_distribution(self, k):
        if self.body.label != "box":
            return None
        lo, hi = self.bounding_box()
        return stats.uniform(loc=lo[k], scale=hi[k] - lo[k])

    def to_spec(self):
        return {
            "family": self.family_tag,
            "dimension": self.dimension,
            "params": dict(self._spec_params),
        }


class ProductExponentialDensity(LogConcaveDensity):
    """Π λ_k exp(-λ_k (x_k - s_k)) on the orthant x >= s; level sets are simplices."""

    family_tag = "product-exponential"

    def __init__(self, rates, shift=None):
        lam = np.asarray(rates, dtype=float).reshape(-1)
        super().__init__(lam.shape[0])
        if np.any(lam <= 0) or not np.all(np.isfinite(lam)):
            raise ConfigError("exponential rates must be positive and finite")
        s = np.zeros(self.dimension) if shift is None else np.asarray(shift, dtype=float)
        if s.shape != lam.shape:
            raise ConfigError("shift must match the number of rates")
        self.rates = lam
        self.shift = s
        self._log_max = float(np.sum(np.log(lam)))

    def log_pdf(self, X) -> np.ndarray:
        Z = as_points(X, self.dimension) - self.shift
        inside = np.all(Z >= 0, axis=1)
        return np.where(inside, self._log_max - Z @ self.rates, -np.inf)

    @property
    def max_value(self) -> float:
        return math.exp(self._log_max)

    @property
    def mode(self) -> np.ndarray:
        return self.shift.copy()

    def _level_body(self, y: float) -> ConvexBody:
        t = self._log_max - math.log(y)
        if t <= 0 or y >= self.max_value:
            return _point_body(self.shift)
        d = self.dimension
        halfspaces = [Halfspace(self.rates, t + float(self.rates @ self.shift))]
        for k in range(d):
            e = np.zeros(d)
            e[k] = -1.0
            halfspaces.append(Halfspace(e, -self.shift[k]))
        vertices = np.vstack([self.shift, self.shift + np.diag(t / self.rates)])
        P = Polytope(tuple(halfspaces), d, vertices=vertices, bounded=True)
        # Simplex volume t^d / (d! Π λ)
        exact = t**d / (math.factorial(d) * float(np.prod(self.rates)))
        return ConvexBody(
            dimension=d,
            membership=P.contains_many,
            interior_point=vertices.mean(axis=0),
            bounding_box=P.bounding_box(),
            exact_volume=exact,
            polytope=P,
            label="simplex",
        )

    def _sample(self, n, rng):
        return self.shift + rng.exponential(1.0 / self.rates, size=(n, self.dimension))

    def bounding_box(self, mass_out=GRID_TAIL_MASS):
        reach = math.log(self.dimension / mass_out) / self.rates
        return self.shift.copy(), self.shift + reach

    def breakpoints_1d(self):
        return [float(self.shift[0])] if self.dimension == 1 else []

    def coordinate_distribution(self, k):
        return stats.expon(loc=self.shift[k], scale=1.0 / self.rates[k])

    def to_spec(self):
        return {
            "family": self.family_tag,
            "dimension": self.dimension,
            "params": {"rates": self.rates.tolist(), "shift": self.shift.tolist()},
        }


class ProductLaplaceDensity(LogConcaveDensity):
    """Π exp(-|x_k - μ_k| / b_k) / (2 b_k); level sets are cross-polytopes."""

    family_tag = "product-laplace"

    def __init__(self, loc, scale):
        mu = np.asarray(loc, dtype=float).reshape(-1)
        super().__init__(mu.shape[0])
        b = np.asarray(scale, dtype=float).reshape(-1)
        if b.shape != mu.shape:
            raise ConfigError("scale must match loc")
        if np.any(b <= 0) or not np.all(np.isfinite(b)):
            raise ConfigError("Laplace scales must be positive and finite")
        self.loc = mu
        self.scale = b
        self._log_max = -float(np.sum(np.log(2.0 * b)))

    def log_pdf(self, X) -> np.ndarray:
        Z = np.abs(as_points(X, self.dimension) - self.loc)
        return self._log_max - Z @ (1.0 / self.scale)

    @property
    def max_value(self) -> float:
        return math.exp(self._log_max)

    @property
    def mode(self) -> np.ndarray:
        return self.loc.copy()

    def _level_body(self, y: float) -> ConvexBody:
        t = self._log_max - math.log(y)
        if t <= 0 or y >= self.max_value:
            return _point_body(self.loc)
        d = self.dimension
        signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * d, indexing="ij")).reshape(d, -1).T
        halfspaces = tuple(
            Halfspace(sigma / self.scale, t + float((sigma / self.scale) @ self.loc))
            for sigma in signs
        )
        vertices = np.vstack(
            [self.loc + np.diag(t * self.scale), self.loc - np.diag(t * self.scale)]
        )
        P = Polytope(halfspaces, d, vertices=vertices, bounded=True)
        exact = (2.0 * t) ** d / math.factorial(d) * float(np.prod(self.scale))
        return ConvexBody(
            dimension=d,
            membership=P.contains_many,
            interior_point=self.loc.copy(),
            bounding_box=(self.loc - t * self.scale, self.loc + t * self.scale),
            exact_volume=exact,
            polytope=P,
            label="cross-polytope",
        )

    def _sample(self, n, rng):
        return rng.laplace(self.loc, self.scale, size=(n, self.dimension))

    def bounding_box(self, mass_out=GRID_TAIL_MASS):
        reach = math.log(self.dimension / mass_out) * self.scale
        return self.loc - reach, self.loc + reach

    def breakpoints_1d(self):
        return [float(self.loc[0])] if self.dimension == 1 else []

    def coordinate_distribution(self, k):
        return stats.laplace(loc=self.loc[k], scale=self.scale[k])

    def to_spec(self):
        return {
            "family": self.family_tag,
            "dimension": self.dimension,
            "params": {"loc": self.loc.tolist(), "scale": self.scale.tolist()},
        }


class GenericLogConcaveDensity(LogConcaveDensity):
    """
    Density e^{φ} for a caller-supplied concave potential and mode.

    The mode is checked for local maximality, not searched for. Level sets are
    membership oracles with a bounding box scaled from the e-fold drop radius
    of φ around the mode. There is no exact sampler.
    """

    family_tag = "generic"
    has_sampler = False

    def __init__(
        self,
        potential: Callable[[np.ndarray], np.ndarray],
        mode,
        scan_directions: int = 32,
        seed: SeedLike = 0,
    ):
        m = np.asarray(mode, dtype=float).reshape(-1)
        super().__init__(m.shape[0])
        self.potential = potential
        self._mode = m
        self._log_max = float(self._phi(m[None, :])[0])
        if not math.isfinite(self._log_max):
            raise ConfigError("potential must be finite at the mode")
        self._check_local_max(seed)
        self.drop_radius = self._e_fold_radius(scan_directions, seed)

    def _phi(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(self.potential(X), dtype=float).reshape(-1)

    def _check_local_max(self, seed: SeedLike) -> None:
        rng = make_rng(seed)
        d = self.dimension
        steps = np.vstack([np.eye(d), -np.eye(d), rng.standard_normal((8 * d, d))])
        for h in (1e-3, 1e-5):
            values = self._phi(self._mode + h * steps)
            if np.any(values > self._log_max + 1e-12 * max(1.0, abs(self._log_max))):
                raise ConfigError("supplied mode is not a local maximum of the potential")

    def _e_fold_radius(self, scan_directions: int, seed: SeedLike) -> float:
        d = self.dimension
        rng = make_rng(seed)
        U = np.vstack([np.eye(d), -np.eye(d), rng.standard_normal((scan_directions, d))])
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        target = self._log_max - 1.0
        radii = []
        for u in U:
            hi = 1e-3
            while self._phi((self._mode + hi * u)[None, :])[0] > target:
                hi *= 2.0
                if hi > 1e12:
                    raise UnboundedBodyError("potential does not decay: density not integrable")
            lo = 0.0
            while hi - lo > RAY_TOLERANCE * max(1.0, hi):
                mid = 0.5 * (lo + hi)
                if self._phi((self._mode + mid * u)[None, :])[0] > target:
                    lo = mid
                else:
                    hi = mid
            radii.append(hi)
        return float(max(radii))

    def log_pdf(self, X) -> np.ndarray:
        return self._phi(as_points(X, self.dimension))

    @property
    def max_value(self) -> float:
        return math.exp(self._log_max)

    @property
    def mode(self) -> np.ndarray:
        return self._mode.copy()

    def _level_body(self, y: float) -> ConvexBody:
        t = self._log_max - math.log(y)
        if t <= 0 or y >= self.max_value:
            return _point_body(self._mode)
        log_y = math.log(y)
        half = max(1.0, 2.0 * t) * self.drop_radius

        def membership(X: np.ndarray) -> np.ndarray:
            return self._phi(X) >= log_y - 1e-12 * max(1.0, abs(log_y))

        return ConvexBody(
            dimension=self.dimension,
            membership=membership,
            interior_point=self._mode.copy(),
            bounding_box=(self._mode - half, self._mode + half),
            label=f"level(y={y:.4g})",
        )

    def bounding_box(self, mass_out=GRID_TAIL_MASS):
        half = max(1.0, 2.0 * (math.log(1.0 / mass_out) + self.dimension)) * self.drop_radius
        return self._mode - half, self._mode + half

    def to_spec(self):
        return {
            "family": self.family_tag,
            "dimension": self.dimension,
            "params": {"mode": self._mode.tolist()},
        }


class ContaminatedDensity:
    """
    Mixture (1 - η)·base + η·contaminant; not log-concave in general.

    Samples pick their branch with an independent Bernoulli(η) draw.
    """

    is_log_concave = False
    is_piecewise_constant = False
    family_tag = "contaminated"

    def __init__(self, base: LogConcaveDensity, contaminant, weight: float):
        if not 0.0 <= weight < 1.0:
            raise ConfigError(f"contamination weight must lie in [0, 1), got {weight}")
        if contaminant.dimension != base.dimension:
            raise DimensionMismatchError("contaminant and base densities differ in dimension")
        self.base = base
        self.contaminant = contaminant
        self.weight = float(weight)
        self.dimension = base.dimension
        self.has_sampler = base.has_sampler and contaminant.has_sampler

    def pdf(self, X) -> np.ndarray:
        pts = as_points(X, self.dimension)
        return (1.0 - self.weight) * self.base.pdf(pts) + self.weight * self.contaminant.pdf(pts)

    def value_at(self, x) -> float:
        return float(self.pdf(np.asarray(x, dtype=float).reshape(1, -1))[0])

    def sample(self, n: int, seed: SeedLike = 0) -> np.ndarray:
        if n < 1:
            raise ConfigError(f"sample size must be >= 1, got {n}")
        branch_seed, base_seed, cont_seed = spawn_seeds(seed, 3)
        from_contaminant = make_rng(branch_seed).random(n) < self.weight
        k = int(from_contaminant.sum())
        out = np.empty((n, self.dimension))
        if n - k:
            out[~from_contaminant] = self.base.sample(n - k, base_seed)
        if k:
            out[from_contaminant] = self.contaminant.sample(k, cont_seed)
        return out

    def bounding_box(self, mass_out=GRID_TAIL_MASS):
        lo_a, hi_a = self.base.bounding_box(mass_out)
        lo_b, hi_b = self.contaminant.bounding_box(mass_out)
        return np.minimum(lo_a, lo_b), np.maximum(hi_a, hi_b)

    def breakpoints_1d(self):
        return sorted(set(self.base.breakpoints_1d()) | set(self.contaminant.breakpoints_1d()))

    def to_spec(self):
        spec = self.base.to_spec()
        spec["contamination"] = {"weight": self.weight, "contaminant": self.contaminant.to_spec()}
        return spec

    def __repr__(self) -> str:
        return f"ContaminatedDensity(base={self.base!r}, weight={self.weight})"


def _body_from_params(params: dict, d: int) -> tuple[ConvexBody, dict]:
    kind = params.get("body", "box")
    if kind == "box":
        body = ConvexBody.box(params["lo"], params["hi"])
    elif kind == "ball":
        body = ConvexBody.ball(params.get("center", [0.0] * d), params.get("radius", 1.0))
    elif kind == "ellipsoid":
        body = ConvexBody.ellipsoid(params["center"], params["shape"], params.get("radius", 1.0))
    elif kind == "polygon":
        body = ConvexBody.polygon(params["vertices"])
    else:
        raise ConfigError(f"unknown body kind {kind!r}")
    if body.dimension != d:
        raise ConfigError(f"body lives in R^{body.dimension}, spec says dimension {d}")
    return body, dict(params)


def density_from_spec(spec: dict):
    """
    Build a density from the JSON specification format.

    Format:
        {"family": ..., "dimension": d, "params": {...},
         "contamination": {"weight": η, "contaminant": <spec>}}   (optional)

    Families and params:
        gaussian:            mean, cov (matrix) or sigma (per-coordinate std devs)
        uniform-convex:      body = box (lo, hi) | ball (center, radius)
                             | ellipsoid (center, shape, radius) | polygon (vertices)
        product-exponential: rates, shift (optional)
        product-laplace:     loc, scale
    """
    try:
        family = spec["family"]
        d = int(spec["dimension"])
        params = spec.get("params", {})
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed density spec: {exc}") from exc

    try:
        if family == "gaussian":
            mean = params.get("mean", [0.0] * d)
            if "cov" in params:
                cov = params["cov"]
            else:
                sigma = np.asarray(params.get("sigma", [1.0] * d), dtype=float).reshape(-1)
                cov = np.diag(sigma**2)
            density = GaussianDensity(mean, cov)
        elif family == "uniform-convex":
            body, body_params = _body_from_params(params, d)
            density = UniformConvexDensity(body, body_params)
        elif family == "product-exponential":
            density = ProductExponentialDensity(params.get("rates", [1.0] * d), params.get("shift"))
        elif family == "product-laplace":
            density = ProductLaplaceDensity(
                params.get("loc", [0.0] * d), params.get("scale", [1.0] * d)
            )
        else:
            raise ConfigError(f"unknown density family {family!r}")
    except LabError:
        raise
    except KeyError as exc:
        raise ConfigError(f"density spec for {family} is missing {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"density spec for {family} has a bad value: {exc}") from exc

    if density.dimension != d:
        raise ConfigError(f"{family} params describe R^{density.dimension}, spec says {d}")

    contamination = spec.get("contamination")
    if contamination:
        try:
            contaminant_spec = contamination["contaminant"]
            weight = float(contamination["weight"])
        except KeyError as exc:
            raise ConfigError(f"contamination is missing {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed contamination: {exc}") from exc
        return ContaminatedDensity(density, density_from_spec(contaminant_spec), weight)
    return density
