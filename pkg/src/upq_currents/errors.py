"""Exception types raised across the package."""


class UPQError(Exception):
    """Base class for all errors raised by upq_currents."""


class DimensionMismatch(UPQError, ValueError):
    pass


class NotHermitian(UPQError, ValueError):
    pass


class NotPositiveDefinite(UPQError, ValueError):
    pass


class NotSkewHermitian(UPQError, ValueError):
    pass


class SignatureMismatch(UPQError, ValueError):
    pass


class DecompositionFailed(UPQError, ArithmeticError):
    """The block solve of g g* = p p* hit a singular or inconsistent block."""


class InvalidInput(UPQError, ValueError):
    pass


class NonFinite(UPQError, ArithmeticError):
    """A windowed integral keeps growing with the window (or is not finite)."""


class QuadratureUnstable(UPQError, ArithmeticError):
    pass


class WindowTooLarge(UPQError, ValueError):
    pass


class VariantMismatch(UPQError, ValueError):
    pass


class ConfigInvalid(UPQError, ValueError):
    pass


class SuiteFailed(UPQError, RuntimeError):
    pass
