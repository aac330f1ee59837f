"""Exception types shared across the package."""


class HsaLabError(Exception):
    """Base class for all errors raised by this package."""


class DivisionByZero(HsaLabError):
    """Multiplicative inverse of zero requested."""


class ShapeError(HsaLabError):
    """Matrix dimensions incompatible with the requested operation."""


class SingularMatrix(HsaLabError):
    """A square matrix required to be invertible is singular."""


class CauchyDegenerate(HsaLabError):
    """Cauchy parameters violate distinctness or hit a zero denominator."""


class NoSuchRoot(HsaLabError):
    """No primitive root of unity of the requested order exists."""


class InvalidTopology(HsaLabError):
    """User-relay association violates the homogeneous network invariants."""


class InvalidArgument(HsaLabError):
    """Argument outside the operation's declared domain."""


class FieldTooSmall(HsaLabError):
    """The prime field cannot host the requested construction."""


class InfeasibleParameters(HsaLabError):
    """Scheme parameters violate the construction's hypothesis."""


class ConstructionFailed(HsaLabError):
    """Randomized construction exhausted its resampling budget."""

    def __init__(self, message: str, attempts: int = 0):
        super().__init__(message)
        self.attempts = attempts


class ProtocolViolation(HsaLabError):
    """A protocol round received messages from the wrong set of parties."""


class TooLargeToEnumerate(HsaLabError):
    """Exhaustive enumeration would exceed the configured cap."""
