"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """Caller passed inconsistent shapes, ranks, or parameter values."""


class NumericalFailureError(RuntimeError):
    """A numerical routine failed to produce a usable result.

    ``iterations`` carries the iteration count (or cap) of the failing
    routine; ``sweep`` carries the solver sweep index when raised from an
    alternating solve.
    """

    def __init__(self, message, iterations=None, sweep=None):
        super().__init__(message)
        self.iterations = iterations
        self.sweep = sweep


class SingularMatrixError(NumericalFailureError):
    """Exact singularity detected during factorization.

    ``column`` is the zero-based pivot column at which elimination failed.
    """

    def __init__(self, message, column=None, sweep=None):
        super().__init__(message, sweep=sweep)
        self.column = column


class MatrixFormatError(ValueError):
    """A matrix or tensor file could not be parsed.

    ``line_number`` is 1-based and counts every physical line of the file.
    """

    def __init__(self, message, path=None, line_number=None):
        prefix = ""
        if path is not None:
            prefix = f"{path}:"
            if line_number is not None:
                prefix += f"{line_number}:"
            prefix += " "
        super().__init__(prefix + message)
        self.path = path
        self.line_number = line_number
