"""Exception types raised by the steerable ePCA library."""


class SepcaError(Exception):
    """Base class for all steerable ePCA errors."""


class InvalidArgumentError(SepcaError, ValueError):
    """Raised when an argument is outside the range an operation accepts."""


class EmptyBasisError(SepcaError):
    """Raised when the sampling criterion admits no Fourier-Bessel function."""


class BasisIndexError(SepcaError, IndexError):
    """Raised when an (k, q) pair is not part of the truncated basis."""


class DegenerateInputError(SepcaError):
    """Raised when the data carries no usable signal (e.g. an all-zero mean)."""


class DataFormatError(SepcaError):
    """Raised when a stack, model or ground-truth file cannot be decoded."""


class NumericalError(SepcaError):
    """Raised when a numerical step fails beyond recovery."""


class GroundTruthError(SepcaError):
    """Raised when a synthetic ground-truth model violates its constraints."""
