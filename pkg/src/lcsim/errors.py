"""Exception types raised across the package.

Every class derives from ``ValueError`` so callers that only care about
"bad input" can catch that, while tests can pin the precise failure.
"""


class LCSimError(ValueError):
    pass


class SizeError(LCSimError):
    """Qubit count or register size outside the supported range."""


class ValidityError(LCSimError):
    """A gate or operator violates its algebraic contract (e.g. unitarity)."""


class ShapeError(LCSimError):
    pass


class DomainError(LCSimError):
    """Numerical input outside the domain of the operation."""


class ConditioningError(LCSimError):
    pass


class NormalizationError(LCSimError):
    pass


class ParseError(LCSimError):
    pass


class IntegrationError(LCSimError):
    pass


class OptimizationError(LCSimError):
    def __init__(self, message, params=None):
        super().__init__(message)
        self.params = params


class TomographyError(LCSimError):
    pass
