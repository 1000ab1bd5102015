"""Exception types shared across the package.

Validation problems derive from ``ValidationError`` and numerical failures from
``NumericalError``; the CLI maps them to exit codes 2 and 3.
"""


class HilbertLabError(Exception):
    """Base class for all package errors."""


class ValidationError(HilbertLabError, ValueError):
    """Bad input: wrong parameters, malformed spec files, violated preconditions."""


class NumericalError(HilbertLabError, ArithmeticError):
    """A numerical routine failed to reach its tolerance."""


class NotInterior(ValidationError):
    pass


class NonUnitDirection(ValidationError):
    pass


class CoincidentPoints(ValidationError):
    pass


class NonConvexInput(ValidationError):
    pass


class NotSymmetric(ValidationError):
    pass


class InvalidParameter(ValidationError):
    pass


class OutOfDomain(ValidationError):
    pass


class InsufficientData(ValidationError):
    pass


class InsufficientGaps(ValidationError):
    pass


class NotInSet(ValidationError):
    pass


class ExponentOrder(ValidationError):
    pass


class NotOrderPreserving(ValidationError):
    pass


class BaseMapNotInjective(ValidationError):
    pass


class QuadratureNonConvergent(NumericalError):
    pass


class NoIntersection(NumericalError):
    pass


class NonConvexOutput(NumericalError):
    pass
