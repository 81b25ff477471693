"""Exception types raised across the package."""


class RelaySecError(Exception):
    """Base class for all package errors."""


class ShapeError(RelaySecError, ValueError):
    """Operands have incompatible dimensions."""


class SingularityError(RelaySecError, ArithmeticError):
    """Matrix is singular or too ill-conditioned to invert.

    The condition estimate that triggered the error is kept in ``cond``.
    """

    def __init__(self, message: str, cond: float = float("inf")):
        super().__init__(message)
        self.cond = cond


class DomainError(RelaySecError, ValueError):
    """Input lies outside the mathematical domain of an operation."""


class ArgumentError(RelaySecError, ValueError):
    """Invalid argument combination."""


class StarvationError(RelaySecError):
    """No admissible link exists for a buffer-aided selection rule."""


class BufferOverflowError(RelaySecError):
    """Push onto a full relay queue."""


class BufferUnderflowError(RelaySecError):
    """Pop from an empty relay queue."""


class DegenerateSlotError(RelaySecError):
    """Selection could not find any feasible action in this slot."""


class ConfigError(RelaySecError, ValueError):
    """Configuration text is malformed or violates a system invariant."""
