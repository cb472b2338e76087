"""
ABOUTME: Exception hierarchy shared by the laboratory modules
ABOUTME: Each error carries the process exit code the experiment CLI reports for it
"""


class LabError(Exception):
    """Base class for every error raised by the laboratory."""

    exit_code = 1


class ConfigError(LabError, ValueError):
    """Invalid parameters or malformed configuration."""

    exit_code = 2


class BudgetExhaustedError(LabError):
    """A numerical budget ran out before the requested accuracy was reached."""

    exit_code = 3


class DimensionMismatchError(LabError, ValueError):
    """Operands live in different dimensions."""


class DegenerateGeometryError(LabError):
    """Hull or body has empty interior (affinely dependent points)."""


class UnboundedBodyError(LabError):
    """A ray never left the bounding box, or the body has no finite box."""


class LevelSetError(LabError, ValueError):
    """Level-set request outside the admissible range of heights."""


class SamplerError(LabError):
    """Sampling is unavailable or a rejection sampler starved."""


class SelectionError(LabError):
    """Minimum-distance selection failed (empty class, broken certificate)."""


class GeometryError(LabError, ValueError):
    """Point or direction inconsistent with the body it is used against."""
