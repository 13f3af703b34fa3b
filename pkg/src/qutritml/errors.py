"""Exception types shared across the package."""


class QutritmlError(Exception):
    """Base class for all package-specific errors."""


class PreconditionError(QutritmlError, ValueError):
    """An operation was called with input violating its contract."""


class DimensionError(PreconditionError):
    """Operand dimensions are unsupported or inconsistent."""


class FormatError(QutritmlError, ValueError):
    """A persisted file is malformed or has an unsupported version."""


class NumericalError(QutritmlError, ArithmeticError):
    """Computation produced values outside numerical tolerance."""


class SolverError(QutritmlError, RuntimeError):
    """A numerical routine failed to converge or broke down."""


class SearchError(QutritmlError, RuntimeError):
    """Model search exhausted its budget without a usable candidate."""
