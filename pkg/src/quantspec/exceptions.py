"""Exception hierarchy for quantspec."""


class QuantspecError(Exception):
    """Base class for all errors raised by quantspec."""


class InvalidInputError(QuantspecError, ValueError):
    """Raised when an argument violates a documented precondition."""


class BoundaryError(InvalidInputError):
    """Raised when an ordinate window reaches frequency 0 or pi."""


class UnsupportedKernelError(InvalidInputError):
    """Raised when a lag window does not meet an estimator's requirements."""


class PositivityRejectionError(QuantspecError, RuntimeError):
    """Raised when no positive QAR path was found within the attempt budget."""


class CsvParseError(InvalidInputError):
    """Raised when a CSV cell cannot be read as a finite real number."""

    def __init__(self, row, column, cell):
        self.row = row
        self.column = column
        self.cell = cell
        super().__init__(
            f"row {row}, column {column!r}: cannot parse {cell!r} as a finite number"
        )


class SchemaError(InvalidInputError):
    """Raised when a CSV or config file lacks a required field."""
