"""Exception types raised across the toolkit."""


class RobustLingamError(Exception):
    """Base class for all errors raised by this package."""


class ConstantPredictor(RobustLingamError):
    """Raised when a slope estimator receives a constant regressor.

    Every pairwise denominator vanishes in that case, so no slope
    functional is defined.
    """


class ConstantInput(ConstantPredictor):
    """Raised when a dependence measure receives a constant vector.

    Subclasses :class:`ConstantPredictor` because the failure mode is
    the same degenerate geometry seen from the measure side.
    """


class DegenerateData(RobustLingamError):
    """Raised when the order search hits a constant residual column.

    Parameters
    ----------
    message : str
    round_index : int
        Zero-based peeling round in which the degeneracy appeared.
    """

    def __init__(self, message, round_index):
        super().__init__(message)
        self.round_index = round_index


class SingularDesign(RobustLingamError):
    """Raised when the connection-matrix regression design is singular."""


class ParseError(RobustLingamError):
    """Raised when CSV or JSON input cannot be interpreted.

    Parameters
    ----------
    message : str
    row : int or None
        Zero-based row of the offending record, when known.
    column : int or None
        Zero-based column of the offending field, when known.
    """

    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.row = row
        self.column = column
