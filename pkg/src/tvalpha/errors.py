"""Exception types shared across the package."""


class TvalphaError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(TvalphaError):
    """Invalid configuration (spline order, GARCH parameters, plan fields, ...)."""


class DimensionError(TvalphaError):
    """Shape mismatch between related inputs."""


class SingularDesignError(TvalphaError):
    """Sieve design too ill-conditioned to fit."""

    def __init__(self, cond: float, cap: float):
        self.cond = cond
        self.cap = cap
        super().__init__(
            f"design matrix Z'Z condition number {cond:.3e} exceeds cap {cap:.1e}"
        )


class DegenerateVarianceError(TvalphaError):
    """A variance, long-run variance, or bootstrap spread is nonpositive."""


class DomainError(TvalphaError):
    """Argument outside its mathematical domain (p-values, lags, ...)."""
