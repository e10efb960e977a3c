"""Exception types shared across the package.

The CLI maps these onto exit codes: InputError -> 2, NumericalError -> 3.
"""


class LinkpredError(Exception):
    """Base class for all package errors."""


class InputError(LinkpredError):
    """Bad data: malformed files, invalid parameters, inconsistent shapes."""


class NumericalError(LinkpredError):
    """An iterative computation failed to converge or is outside its validity range."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual
