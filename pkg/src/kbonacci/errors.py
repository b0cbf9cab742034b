"""Exception types shared across the package."""


class KbonacciError(Exception):
    """Base class for all errors raised by this package."""


class OrderError(KbonacciError, ValueError):
    """The recurrence order k is outside the supported range (k >= 2 required)."""


class IndexDomainError(KbonacciError, ValueError):
    """The index n is below the sequence domain; terms are defined for n >= 2 - k."""


class MalformedRangeError(KbonacciError, ValueError):
    """A row collection or index range is not contiguous or is otherwise malformed."""


class RootIsolationError(KbonacciError):
    """A certified sign change (or bracket refinement step) could not be established."""


class ConvergenceError(KbonacciError):
    """Simultaneous root iteration did not reach the residual target.

    Carries the best residuals achieved so the caller can inspect how close
    the iteration got.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or []


class PoleProximityError(KbonacciError, ValueError):
    """An input enclosure touches the pole of the coefficient function."""


class DegenerateDenominatorError(KbonacciError, ValueError):
    """A coefficient denominator is too close to zero to evaluate reliably."""


class CertificationError(KbonacciError):
    """Rounding certification failed within the precision cap."""
