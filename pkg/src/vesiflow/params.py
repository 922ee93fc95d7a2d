"""Material constants of the membrane/bulk system."""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class MaterialParams:
    """Viscosities, bending constants and numerical shift.

    Parameters
    ----------
    mu_b : float
        Bulk viscosity, > 0.
    mu : float
        Surface viscosity, >= 0.
    kappa : float
        Bending rigidity, > 0.
    C0 : float
        Spontaneous curvature (1/length).
    eta : float
        Resolvent shift, >= 0. Production runs use 0.
    gamma : float
        Tubular radius; height fields must satisfy ``max|h| < gamma``.
    alpha_scale : float
        Multiplies the cached ``alpha``. Exists only so verification suites
        can be mutation-tested; leave at 1.
    """

    mu_b: float = 1.0
    mu: float = 1.0
    kappa: float = 1.0
    C0: float = 0.0
    eta: float = 0.0
    gamma: float = 1.0
    alpha_scale: float = field(default=1.0, repr=False)

    def __post_init__(self):
        for name in ("mu_b", "mu", "kappa", "C0", "eta", "gamma", "alpha_scale"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.mu_b <= 0:
            raise ValueError(f"mu_b must be > 0, got {self.mu_b}")
        if self.mu < 0:
            raise ValueError(f"mu must be >= 0, got {self.mu}")
        if self.kappa <= 0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        if self.eta < 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")

    @cached_property
    def alpha(self) -> float:
        """kappa / (2 mu_b^(5/2)), the prefactor of the boundary symbol."""
        return self.alpha_scale * self.kappa / (2.0 * self.mu_b**2.5)

    @cached_property
    def sqrt_mu_b(self) -> float:
        return float(np.sqrt(self.mu_b))

    def replace(self, **changes) -> "MaterialParams":
        """Return a copy with some fields changed."""
        values = {name: getattr(self, name) for name in self.__dataclass_fields__}
        values.update(changes)
        return MaterialParams(**values)
