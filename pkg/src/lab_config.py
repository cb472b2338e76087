#!/usr/bin/env python3
"""
ABOUTME: Configuration parameters for the log-concave estimation laboratory
ABOUTME: Defines tolerances, structure constants, Monte Carlo budgets and worker limits
"""

import logging
import math
import os

from dotenv import load_dotenv

from lab_errors import ConfigError


# Load environment variables (LOGCAVE_THREADS may live in a local .env)
load_dotenv()

logger = logging.getLogger(__name__)

LAB_VERSION = "0.3.0"

# Geometry tolerances
HALFSPACE_TOLERANCE = 1e-12  # Relative slack in a·x ≤ b (scaled by max(1, |b|, ‖x‖))
RAY_TOLERANCE = 1e-10  # Bisection stops once the bracket is shorter than this
COPLANAR_TOLERANCE = 1e-9  # Hull triangles whose planes agree this closely are one facet
DEGENERATE_RADIUS = 1e-9  # Level sets thinner than this are treated as degenerate

# Structure constants for the class of piecewise-polytope densities
DEFAULT_C_L = 2.0  # Multiplier in the number of levels L
DEFAULT_C_H = 1.0  # Constant inside the facet budget H
APPROX_RUN_C_H = 4.0  # c_H for approx runs: planar octagons fit the budget at eps = 0.1
DEFAULT_C_DELTA = 2.0  # Base constant of the tail threshold delta = eps^2 / (c_delta d)^(2d)
MAX_APPROX_DIMENSION = 3  # Hull-to-halfspace conversion is exact only up to here
CEIL_GUARD = 1e-9  # Absorbs float noise before taking ceilings of formula values

# Monte Carlo budgets
DEFAULT_MC_BUDGET = 200_000  # Samples for volumes and set integrals
DEFAULT_DISTANCE_BUDGET = 400_000  # Samples for TV / Hellinger in d >= 2
MC_CHUNK_SIZE = 65_536  # Samples per independent substream
GRID_START_CELLS = 2_048  # Initial cell count for 1-D grid integration
GRID_MAX_CELLS = 4_194_304  # Refinement cap for 1-D grid integration
GRID_TOLERANCE = 1e-7  # Successive Richardson estimates must agree to this
GRID_TAIL_MASS = 1e-13  # Integration window drops at most this much mass per side

# Sampling
REJECTION_ACCEPTANCE_FLOOR = 1e-3  # Rejection samplers below this rate are refused
REJECTION_MAX_ROUNDS = 200  # Proposal batches before giving up on a rejection sampler

# Selection among candidate densities
DEFAULT_SAMPLE_CONSTANT = 5.0  # c in n = ceil(c V / eps^2)
DEFAULT_INTEGRAL_BUDGET = 100_000  # Pool size for set masses of one candidate
YATRACOS_GRID_CELLS = 4_096  # Scan cells for density crossings in d = 1

# Search budgets for the VC laboratory
MAX_SHATTER_POINTS = 20  # Exact enumeration refuses larger point sets
MAX_VC_K = 12  # Largest candidate set size in a VC search
DEFAULT_SEARCH_BUDGET = 2_000  # Random point sets tried per size in lower-bound search
MAX_GROWTH_CONFIGS = 250_000  # Cap on (member, member) pairs in growth counting

# Concurrency
DEFAULT_WORKERS = 4  # Worker threads when LOGCAVE_THREADS is unset
MIN_WORKERS = 1
MAX_WORKERS = 64

# Display settings
USE_EMOJI_OUTPUT = True  # Use emojis in terminal output


def worker_count() -> int:
    """Worker threads to use, read from LOGCAVE_THREADS and clamped to sane bounds."""
    raw = os.getenv("LOGCAVE_THREADS")
    if raw is None or raw.strip() == "":
        return DEFAULT_WORKERS
    try:
        requested = int(raw)
    except ValueError:
        logger.warning(
            "⚠️  LOGCAVE_THREADS=%r is not an integer, using default %d", raw, DEFAULT_WORKERS
        )
        return DEFAULT_WORKERS
    if requested < MIN_WORKERS:
        logger.warning("⚠️  LOGCAVE_THREADS=%d too low, using minimum %d", requested, MIN_WORKERS)
        return MIN_WORKERS
    if requested > MAX_WORKERS:
        logger.warning("⚠️  LOGCAVE_THREADS=%d too high, using maximum %d", requested, MAX_WORKERS)
        return MAX_WORKERS
    return requested


def validate_epsilon(epsilon: float, upper: float = 0.5) -> float:
    """Check that epsilon lies in (0, upper]."""
    if not isinstance(epsilon, int | float) or not math.isfinite(epsilon):
        raise ConfigError(f"epsilon must be a finite number, got {epsilon!r}")
    if not 0.0 < epsilon <= upper:
        raise ConfigError(f"epsilon must lie in (0, {upper}], got {epsilon}")
    return float(epsilon)


def validate_dimension(d: int, maximum: int | None = None) -> int:
    """Check that d is a positive integer, optionally capped."""
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise ConfigError(f"dimension must be a positive integer, got {d!r}")
    if maximum is not None and d > maximum:
        raise ConfigError(f"dimension {d} exceeds the supported maximum {maximum}")
    return d


def ceil_guarded(value: float) -> int:
    """Ceiling that ignores float noise just above an integer."""
    return math.ceil(value - CEIL_GUARD)


def status_emoji(kind: str) -> str:
    """Get emoji for a status line."""
    if not USE_EMOJI_OUTPUT:
        return ""

    emoji_map = {
        "ok": "✅",
        "fail": "❌",
        "warn": "⚠️ ",
        "stats": "📊",
        "run": "🔬",
        "file": "💾",
    }
    return emoji_map.get(kind, "❓")
