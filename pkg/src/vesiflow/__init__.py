"""Pseudo-spectral simulator and verification suite for relaxational membrane flow."""

__version__ = "0.1.0"

from .errors import (
    AngleError,
    BumpSlopeViolation,
    CompatibilityError,
    ConfigError,
    NoContraction,
    ShiftError,
    SingularSystem,
    StabilityError,
    SymbolZeroError,
    TubularViolation,
    VesiflowError,
    ZeroModeError,
)
from .fields import HeightField, SpectralGrid, TangentField, random_smooth, single_mode
from .params import MaterialParams

__all__ = [
    "AngleError",
    "BumpSlopeViolation",
    "CompatibilityError",
    "ConfigError",
    "HeightField",
    "MaterialParams",
    "NoContraction",
    "ShiftError",
    "SingularSystem",
    "SpectralGrid",
    "StabilityError",
    "SymbolZeroError",
    "TangentField",
    "TubularViolation",
    "VesiflowError",
    "ZeroModeError",
    "random_smooth",
    "single_mode",
]
