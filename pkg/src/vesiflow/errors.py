"""Exception types raised by the simulator and its verifiers."""


class VesiflowError(Exception):
    """Base class for all package errors."""


class TubularViolation(VesiflowError):
    """Height field left the tubular neighbourhood, ``max|h| >= gamma``."""


class BumpSlopeViolation(VesiflowError):
    """Cut-off slope too steep for the Hanzawa map to stay a diffeomorphism."""


class ZeroModeError(VesiflowError):
    """A per-mode symbol was evaluated at the singular wavevector xi = 0."""


class ShiftError(VesiflowError):
    """A formula that divides by the shift eta was called with eta = 0."""


class SymbolZeroError(VesiflowError):
    """The boundary symbol is numerically zero."""


class AngleError(VesiflowError):
    """Sector angles violate ``pi/2 < theta < pi`` or ``0 < 9*vartheta < pi - theta``."""


class CompatibilityError(VesiflowError):
    """Divergence datum with nonzero mean passed to the whole-space solver."""


class NoContraction(VesiflowError):
    """Picard iteration stopped contracting."""


class SingularSystem(VesiflowError):
    """Oracle linear system is rank deficient."""


class StabilityError(VesiflowError):
    """Explicit reference integrator asked to run outside its stability region."""


class ConfigError(VesiflowError):
    """Malformed or inconsistent run configuration."""
