"""Exception types shared across the package."""


class QuadfunError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(QuadfunError):
    """Lattice dimension is zero, negative, or above the configured maximum."""


class DomainError(QuadfunError):
    """A point lies outside the unit torus [0, 1)^D."""


class SupportError(QuadfunError):
    """A frequency falls outside a weight family's support."""


class ConfigurationError(QuadfunError):
    """Incompatible or invalid configuration (e.g. mismatched support rules)."""


class CoverageError(QuadfunError):
    """A spectral profile is missing a coefficient required by an estimator."""


class EstimationError(QuadfunError):
    """Sample data cannot drive the requested estimator (empty set, n too small)."""


class RateError(QuadfunError):
    """The weight pair admits no finite rate / the estimand may be infinite."""


class SolverError(QuadfunError):
    """A truncation-radius search failed (e.g. no solution below the cap)."""


class FitError(QuadfunError):
    """Rate fitting received unusable points."""


class DataFormatError(QuadfunError):
    """Malformed external data (CSV/JSON); carries a 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NonnegativityViolation(QuadfunError):
    """A candidate density dips below zero; carries the offending point and minimum."""

    def __init__(self, message: str, point=None, min_value: float | None = None):
        super().__init__(message)
        self.point = point
        self.min_value = min_value
