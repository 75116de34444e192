class QhamError(Exception):
    """Base class for all errors raised by qham_forge."""


class UnsupportedModelError(QhamError, ValueError):
    pass


class DomainError(QhamError, ValueError):
    """Input lies outside the domain where an operation is defined."""


class SingularInputError(DomainError):
    """A matrix function was evaluated at one of its poles."""


class TangentError(DomainError):
    """A matrix is not a tangent vector at the given base point."""


class DimensionMismatchError(QhamError, ValueError):
    pass


class QuiverError(QhamError, ValueError):
    pass


class CobordismError(QhamError, ValueError):
    pass
