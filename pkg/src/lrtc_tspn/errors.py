"""Exception hierarchy shared by every module."""


class LrtcError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(LrtcError, ValueError):
    """Operands have incompatible shapes."""


class ParameterError(LrtcError, ValueError):
    """A hyperparameter or argument is outside its valid range."""


class NumericalError(LrtcError, ArithmeticError):
    """A numerical kernel (SVD, fixed point) failed.

    ``iteration`` is the solver iteration index when known.
    """

    def __init__(self, message, iteration=None):
        if iteration is not None:
            message = f"{message} (iteration {iteration})"
        super().__init__(message)
        self.iteration = iteration


class UnrecoverableInputError(LrtcError, ValueError):
    """Observed data carries no information to complete from."""


class UnrecoverableMaskError(LrtcError, ValueError):
    """A generated mask leaves no observed entry."""


class EmptyEvaluationError(LrtcError, ValueError):
    """The scoring set is empty."""


class FormatError(LrtcError, ValueError):
    """A file does not follow its documented format."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} at offset {offset}"
        super().__init__(message)
        self.offset = offset


class TruncationError(FormatError):
    """A binary payload is shorter or longer than its header declares."""

    def __init__(self, expected, actual):
        super().__init__(f"payload length mismatch: expected {expected} bytes, got {actual}")
        self.expected = expected
        self.actual = actual
