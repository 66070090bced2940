"""Exception types shared across the package."""


class PerceptionError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(PerceptionError, ValueError):
    """Malformed or out-of-contract input (empty series, NaN, bad shape)."""


class IntegerRangeError(PerceptionError, OverflowError):
    """A scaled value does not fit the exact integer range (|v| >= 2**53)."""


class DomainError(PerceptionError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class DegenerateModelError(PerceptionError, ValueError):
    """Operation requires a model with contrast (total deviation > 0)."""


class MetricError(PerceptionError, ValueError):
    """A metric is undefined for the given inputs (e.g. single-class AUC)."""


class DataFormatError(PerceptionError, ValueError):
    """Problem in an input data file."""


class CellParseError(DataFormatError):
    """A CSV cell failed to parse as a finite number."""


class RaggedRowError(DataFormatError):
    """A CSV row has the wrong number of fields."""


class LabelValueError(DataFormatError):
    """A label cell is not 0 or 1."""


class MissingColumnError(DataFormatError):
    """A named column is absent from the header."""
