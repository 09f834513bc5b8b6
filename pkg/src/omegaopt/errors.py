"""Exception hierarchy shared by every module."""


class OmegaOptError(Exception):
    """Base class; ``code`` is the machine-readable name reported by the CLI."""

    @property
    def code(self) -> str:
        return type(self).__name__


class NotPositiveDefinite(OmegaOptError):
    def __init__(self, pivot: int, value: float):
        super().__init__(f"matrix is not positive definite (pivot {pivot} = {value:.3e})")
        self.pivot = pivot
        self.value = value


class NoConvergence(OmegaOptError):
    pass


class ParseError(OmegaOptError):
    pass


class ValidationError(OmegaOptError):
    pass


class SingularCovariance(OmegaOptError):
    pass


class ZeroWealth(OmegaOptError):
    pass


class DegeneratePortfolio(OmegaOptError):
    pass


class DegenerateNormalization(OmegaOptError):
    def __init__(self, message: str, sign: float = 0.0):
        super().__init__(message)
        self.sign = sign


class NoPositiveExcess(OmegaOptError):
    pass


class IterationLimit(OmegaOptError):
    """Raised when a solver hits its iteration cap; carries the best iterate so far."""

    def __init__(self, message: str, best=None, trace=None):
        super().__init__(message)
        self.best = best
        self.trace = trace


class InfeasibleProjection(OmegaOptError):
    pass


class DimensionTooLarge(OmegaOptError):
    pass


class DegenerateDenominator(OmegaOptError):
    pass


class SkewnessOutOfRange(OmegaOptError):
    pass


class UsageError(OmegaOptError):
    pass
