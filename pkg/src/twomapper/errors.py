"""Exception hierarchy shared by all modules."""


class TwoMapperError(Exception):
    """Base class for every error raised by this package."""


class EmptyInputError(TwoMapperError, ValueError):
    pass


class ParameterError(TwoMapperError, ValueError):
    pass


class FormatError(TwoMapperError, ValueError):
    """A malformed input file. ``row`` and ``column`` are 1-based when known."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class ParseError(FormatError):
    pass


class InconsistencyError(TwoMapperError, ValueError):
    pass


class ScaleError(ParameterError):
    pass


class ContainmentViolationError(TwoMapperError):
    """A cluster at a smaller scale is not contained in a single larger-scale cluster."""


class UnmatchedNodeError(TwoMapperError):
    """A node has no overlapping successor in the next stage."""

    def __init__(self, message, node=None, stage=None):
        super().__init__(message)
        self.node = node
        self.stage = stage


class MonotonicityError(TwoMapperError, ValueError):
    def __init__(self, message, simplex=None):
        super().__init__(message)
        self.simplex = simplex
