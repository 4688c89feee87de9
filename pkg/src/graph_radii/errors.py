class GraphRadiiError(Exception):
    """Base class of every error raised by graph_radii."""


class ParameterError(GraphRadiiError, ValueError):
    """An argument or configuration value is outside its admissible range."""


class GraphParseError(GraphRadiiError, ValueError):
    """An input file line could not be parsed."""

    def __init__(self, line_number: int, line: str, reason: str = 'expected two node identifiers'):
        self.line_number = line_number
        self.line = line
        super().__init__(f'line {line_number}: {reason} (got "{line.rstrip()}")')


class DimensionError(GraphRadiiError, ValueError):
    """Array shapes or row counts do not chain."""


class PreconditionError(GraphRadiiError, ValueError):
    """An operation was called on data that lacks something it needs (labels, masked nodes...)."""


class NumericalError(GraphRadiiError, ArithmeticError):
    """A numerical routine did not reach its accuracy contract."""

    def __init__(self, message: str, residual: float = None):
        self.residual = residual
        if residual is not None:
            message = f'{message} (residual norm {residual:.3e})'
        super().__init__(message)
