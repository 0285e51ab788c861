"""Exception hierarchy shared by every module."""


class BCError(ValueError):
    """Base class for all library errors."""


class ValidationError(BCError):
    """Malformed input: non-squarefree d, composite p, bad exponent vector, ..."""


class DomainError(BCError):
    """A parameter lies outside the range where the operation is defined."""


class UnsupportedFieldError(BCError):
    """The operation needs a field model this library does not provide."""


class NonInvertibleError(BCError, ArithmeticError):
    """Inversion of a residue that is not a unit."""

    def __init__(self, message: str, prime=None):
        super().__init__(message)
        self.prime = prime


NEGATIVE_BETA_MESSAGE = "no KMS states for beta < 0"
