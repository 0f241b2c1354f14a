class BellscopeError(ValueError):
    """Base class for domain errors raised by this package."""


class GuardError(BellscopeError):
    """A size or range guard was exceeded."""


class StructuralError(BellscopeError):
    """Input data is malformed (bad keys, shapes, index tuples)."""


class SignallingError(BellscopeError):
    """A correlation table violates the no-signalling condition."""


class NotInFamilyError(BellscopeError):
    """Coefficients are not a member of the complete correlation family."""

    def __init__(self, message, r=None, value=None):
        super().__init__(message)
        self.r = r
        self.value = value


class InconsistentDeviceError(BellscopeError):
    """Joint-device distributions disagree with the single-device tables."""


class DegeneratePolytopeError(BellscopeError):
    """Point set is not full-dimensional; carries its affine hull."""

    def __init__(self, message, hull=None):
        super().__init__(message)
        self.hull = hull
