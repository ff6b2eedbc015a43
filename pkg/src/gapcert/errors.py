"""Exception hierarchy shared by the numerical modules."""


class GapcertError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(GapcertError, ValueError):
    """Incompatible matrix or system dimensions."""


class DomainError(GapcertError, ValueError):
    """An input lies outside the domain of the operation (e.g. unstable system)."""


class NumericalError(GapcertError, ArithmeticError):
    """An iteration failed to converge or a factorization broke down."""


class RiccatiError(NumericalError):
    """No stabilizing solution of an algebraic Riccati equation was found."""


class FactorizationError(NumericalError):
    """Coprime factorization or Bezout construction failed."""


class SingularityError(NumericalError):
    """Evaluation hit a pole or an algebraic loop."""
