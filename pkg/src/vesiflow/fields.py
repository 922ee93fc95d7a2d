"""Periodic grid fields and the spectral calculus used throughout the package.

Coefficients are normalised so that ``h(x) = sum_xi hhat(xi) exp(i xi.x)``,
i.e. ``hhat = fft2(h) / N**2``. Axis 0 is x1, axis 1 is x2.
"""

import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft


def fft_workers() -> int:
    """Worker count for scipy.fft, capped by ``VESIFLOW_THREADS``."""
    raw = os.environ.get("VESIFLOW_THREADS")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def fft2(values: np.ndarray) -> np.ndarray:
    n = values.shape[-1]
    return sfft.fft2(values, axes=(-2, -1), workers=fft_workers()) / (n * n)


def ifft2(coeffs: np.ndarray) -> np.ndarray:
    n = coeffs.shape[-1]
    return sfft.ifft2(coeffs * (n * n), axes=(-2, -1), workers=fft_workers())


def ifft2_real(coeffs: np.ndarray) -> np.ndarray:
    return ifft2(coeffs).real


def grid_points(n: int, length: float) -> tuple[np.ndarray, np.ndarray]:
    x = np.arange(n) * (length / n)
    return np.meshgrid(x, x, indexing="ij")


@dataclass(frozen=True)
class SpectralGrid:
    """Wavevectors of an ``n x n`` periodic grid of side ``length``."""

    n: int
    length: float

    def __post_init__(self):
        if self.n < 4 or self.n % 2:
            raise ValueError(f"grid size must be an even integer >= 4, got {self.n}")
        if not self.length > 0:
            raise ValueError(f"period must be positive, got {self.length}")

    @cached_property
    def mode_index(self) -> tuple[np.ndarray, np.ndarray]:
        m = np.fft.fftfreq(self.n, 1.0 / self.n).astype(int)
        return np.meshgrid(m, m, indexing="ij")

    @cached_property
    def k(self) -> tuple[np.ndarray, np.ndarray]:
        m1, m2 = self.mode_index
        scale = 2.0 * np.pi / self.length
        return scale * m1, scale * m2

    @cached_property
    def k_odd(self) -> tuple[np.ndarray, np.ndarray]:
        """Wavevectors with the Nyquist row/column zeroed, for odd derivatives."""
        k1, k2 = (kk.copy() for kk in self.k)
        m1, m2 = self.mode_index
        k1[np.abs(m1) == self.n // 2] = 0.0
        k2[np.abs(m2) == self.n // 2] = 0.0
        return k1, k2

    @cached_property
    def k2(self) -> np.ndarray:
        k1, k2 = self.k
        return k1**2 + k2**2

    @cached_property
    def kmag(self) -> np.ndarray:
        return np.sqrt(self.k2)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Two-thirds rule: keep modes with ``|m| <= n/3`` in both directions."""
        m1, m2 = self.mode_index
        cut = self.n // 3
        return (np.abs(m1) <= cut) & (np.abs(m2) <= cut)

    @property
    def cell_area(self) -> float:
        return (self.length / self.n) ** 2

    # -- spectral operators on coefficient arrays --------------------------

    def dx(self, coeffs: np.ndarray, axis: int) -> np.ndarray:
        return 1j * self.k_odd[axis] * coeffs

    def dxx(self, coeffs: np.ndarray, a: int, b: int) -> np.ndarray:
        if a == b:
            return -(self.k[a] ** 2) * coeffs
        return -self.k_odd[0] * self.k_odd[1] * coeffs

    def laplacian(self, coeffs: np.ndarray) -> np.ndarray:
        return -self.k2 * coeffs

    def dealias(self, coeffs: np.ndarray) -> np.ndarray:
        return np.where(self.dealias_mask, coeffs, 0.0)

    def gradient_values(self, values: np.ndarray, dealias: bool = False) -> np.ndarray:
        """Physical-space gradient of a real grid function, shape ``(2, n, n)``."""
        c = fft2(values)
        if dealias:
            c = self.dealias(c)
        return np.stack([ifft2_real(self.dx(c, 0)), ifft2_real(self.dx(c, 1))])

    def divergence_values(self, flux: np.ndarray, dealias: bool = False) -> np.ndarray:
        c1, c2 = fft2(flux[0]), fft2(flux[1])
        if dealias:
            c1, c2 = self.dealias(c1), self.dealias(c2)
        return ifft2_real(self.dx(c1, 0) + self.dx(c2, 1))


class HeightField:
    """Real periodic height ``h`` on an ``N x N`` grid with its coefficients.

    Build from grid values with ``HeightField(values, length)`` or from
    coefficients with :meth:`from_coefficients`. Both views are cached and
    immutable.
    """

    def __init__(self, values, length: float):
        values = np.array(values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"height values must be square 2-D, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("height values must be finite")
        self.grid = SpectralGrid(values.shape[0], float(length))
        values.setflags(write=False)
        self._values = values
        self._coeffs = None

    @classmethod
    def from_coefficients(cls, coeffs, length: float, check_real: bool = True) -> "HeightField":
        coeffs = np.asarray(coeffs, dtype=complex)
        z = ifft2(coeffs)
        if check_real:
            scale = max(np.max(np.abs(z)), 1e-300)
            if np.max(np.abs(z.imag)) > 1e-10 * scale:
                raise ValueError("coefficients are not Hermitian; the field would be complex")
        field = cls(z.real, length)
        # keep the caller's zero mode bit-exact; the volume gauge relies on it
        c = fft2(field._values)
        c[0, 0] = coeffs[0, 0].real
        c.setflags(write=False)
        field._coeffs = c
        return field

    @classmethod
    def zeros(cls, n: int, length: float) -> "HeightField":
        return cls(np.zeros((n, n)), length)

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def coefficients(self) -> np.ndarray:
        if self._coeffs is None:
            c = fft2(self._values)
            c.setflags(write=False)
            self._coeffs = c
        return self._coeffs

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def length(self) -> float:
        return self.grid.length

    @property
    def mean(self) -> float:
        """Mean height, read from the zero mode (the volume proxy)."""
        return float(self.coefficients[0, 0].real)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self._values)))

    def shifted(self, s1: int, s2: int) -> "HeightField":
        return HeightField(np.roll(self._values, (s1, s2), axis=(0, 1)), self.length)

    def __add__(self, other: "HeightField") -> "HeightField":
        return HeightField(self._values + other._values, self.length)

    def __sub__(self, other: "HeightField") -> "HeightField":
        return HeightField(self._values - other._values, self.length)

    def __mul__(self, scalar: float) -> "HeightField":
        return HeightField(self._values * float(scalar), self.length)

    __rmul__ = __mul__

    def __repr__(self):
        return f"HeightField(n={self.n}, length={self.length:g}, max|h|={self.sup_norm:.3g})"


@dataclass(frozen=True)
class TangentField:
    """Tangential vector field by its contravariant components ``(v^1, v^2)``."""

    components: np.ndarray
    length: float

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=float)
        if comps.ndim != 3 or comps.shape[0] != 2 or comps.shape[1] != comps.shape[2]:
            raise ValueError(f"tangent components must have shape (2, N, N), got {comps.shape}")
        object.__setattr__(self, "components", comps)


def single_mode(n: int, length: float, mode=(1, 0), amplitude: float = 1.0, phase: float = 0.0) -> HeightField:
    """``amplitude * cos(xi.x + phase)`` with ``xi = 2 pi mode / length``."""
    x1, x2 = grid_points(n, length)
    xi = 2.0 * np.pi * np.asarray(mode, dtype=float) / length
    return HeightField(amplitude * np.cos(xi[0] * x1 + xi[1] * x2 + phase), length)


def random_smooth(n: int, length: float, seed: int, decay: float = 4.0, amplitude: float = 0.1,
                  max_mode: int | None = None) -> HeightField:
    """Zero-mean random field with spectrum ``(1 + |m|^2)^(-decay/2)`` scaled to ``max|h| = amplitude``.

    ``max_mode`` truncates the spectrum to ``|m_i| <= max_mode``.
    """
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((n, n))
    grid = SpectralGrid(n, length)
    m1, m2 = grid.mode_index
    c = fft2(noise) * (1.0 + m1**2 + m2**2) ** (-decay / 2.0)
    c[0, 0] = 0.0
    c[np.abs(m1) == n // 2] = 0.0
    c[:, np.abs(m2[0]) == n // 2] = 0.0
    if max_mode is not None:
        c[(np.abs(m1) > max_mode) | (np.abs(m2) > max_mode)] = 0.0
    values = ifft2_real(c)
    peak = np.max(np.abs(values))
    if peak == 0:
        return HeightField(values, length)
    return HeightField(values * (amplitude / peak), length)
