"""Exception hierarchy.

Every error carries the process exit code the CLI maps it to, so library
callers and the command line agree on what counts as bad input versus a
numerical failure.
"""


class HetmedError(Exception):
    """Base class for all package errors."""

    exit_code = 4
    kind = "internal"


class InputError(HetmedError, ValueError):
    """Malformed or insufficient input data."""

    exit_code = 2
    kind = "input"


class NumericalError(HetmedError, ArithmeticError):
    """A well-formed input on which the requested computation is undefined."""

    exit_code = 3
    kind = "numerical"

    def __init__(self, message, trace=None):
        super().__init__(message)
        # iterate history for solvers that fail to converge
        self.trace = trace
