"""Exception types shared across the package."""

from __future__ import annotations


class MergmError(Exception):
    """Base class for all package-specific errors."""


class InvalidNodeError(MergmError, ValueError):
    """A node index is out of range or a self-loop was addressed."""


class ModelSpecError(MergmError, ValueError):
    """A model specification is malformed (unknown term, duplicate, bad decay)."""


class ConfigError(MergmError, ValueError):
    """A sampler/estimator configuration violates its invariants."""


class EnumerationLimitError(MergmError, ValueError):
    """Exact enumeration was requested for a network too large to enumerate."""


class BoundaryMleError(MergmError, RuntimeError):
    """The exact MLE diverges (observed statistic on the convex-hull boundary)."""


class DegeneracyError(MergmError, RuntimeError):
    """MC-MLE could not reach the observed statistic: the model is degenerate.

    Carries the last parameter value and the stepping diagnostics so callers
    can still inspect (or report on) the failed fit.
    """

    def __init__(self, message: str, theta=None, diagnostics=None):
        super().__init__(message)
        self.theta = theta
        self.diagnostics = diagnostics


class EdgeListParseError(MergmError, ValueError):
    """An edge-list file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line_number: int | None = None):
        super().__init__(message)
        self.line_number = line_number
