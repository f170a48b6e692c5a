"""Exception and warning classes.

Two families of errors exist so the command line can map them onto stable
exit codes: :class:`ValidationError` for bad configuration (exit 2) and
:class:`DataError` for problems with the data itself (exit 3).
"""


class PermstatError(Exception):
    """Base class for all permstat errors."""


class ValidationError(PermstatError, ValueError):
    """Invalid configuration or argument."""


class DataError(PermstatError, ValueError):
    """The data cannot be analysed as requested."""


# -- configuration -------------------------------------------------------------
class AlphaOutOfRange(ValidationError):
    pass


class PermCountTooLow(ValidationError):
    pass


class SeedOutOfRange(ValidationError):
    pass


class TailUnsupported(ValidationError):
    pass


class SEUnavailable(ValidationError):
    pass


class DomainError(ValidationError):
    pass


# -- data ----------------------------------------------------------------------
class DimensionTooSmall(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class ZeroVariance(DataError):
    pass


class SigmaNonPositive(DataError):
    pass


class Unbalanced(DataError):
    pass


class SampleTooSmall(DataError):
    pass


class TooLargeToEnumerate(DataError):
    pass


class NonFiniteValue(DataError):
    """Raised when a data matrix holds NaN or infinite entries.

    ``cells`` lists the offending ``(row, column)`` coordinates (0-based).
    """

    def __init__(self, message, cells=()):
        super().__init__(message)
        self.cells = list(cells)


class ParseError(DataError):
    def __init__(self, message, row=None, col=None):
        super().__init__(message)
        self.row = row
        self.col = col


class EmptyTable(DataError):
    pass


# -- warnings ------------------------------------------------------------------
class PermstatWarning(UserWarning):
    pass


class LowPermutationCountWarning(PermstatWarning):
    pass


class UnequalSampleSizeWarning(PermstatWarning):
    pass
