"""Whole-space and half-space Stokes solvers with a shift.

All systems read ``eta u - mu_b Lap u + grad pi = f``, ``div u = g`` with the
bulk viscosity ``mu_b``. Fields are Fourier coefficients in the periodic
tangential variables (modes ``xi`` of shape ``(2, ...)``) sampled on a grid in
``y``. The half-space solvers are closed form in ``y``; the whole-space solver
treats ``y`` spectrally on a periodic box ``[-Y, Y)``, so data should decay
well before ``|y| = Y``.
"""

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .errors import CompatibilityError, ShiftError, ZeroModeError
from .fields import SpectralGrid, fft_workers
from .params import MaterialParams

COMPAT_TOL = 1e-12


@dataclass
class BulkField:
    """Velocity ``u = (v1, v2, w)`` and pressure per tangential mode on a ``y`` grid.

    ``u`` has shape ``(3,) + modes + (ny,)`` and ``pi`` has shape ``modes + (ny,)``.
    ``du``, ``d2u`` and ``dpi`` are y-derivatives when the solver knows them.
    """

    xi: np.ndarray
    y: np.ndarray
    u: np.ndarray
    pi: np.ndarray
    du: np.ndarray | None = None
    d2u: np.ndarray | None = None
    dpi: np.ndarray | None = None

    @property
    def v(self) -> np.ndarray:
        return self.u[:2]

    @property
    def w(self) -> np.ndarray:
        return self.u[2]

    def _xi_col(self) -> np.ndarray:
        return self.xi[..., None]

    def divergence(self) -> np.ndarray:
        """``i xi . v + d_y w``."""
        if self.du is None:
            raise ValueError("this field carries no y-derivatives")
        xi = self._xi_col()
        return 1j * (xi[0] * self.u[0] + xi[1] * self.u[1]) + self.du[2]

    def momentum_residual(self, params: MaterialParams, f=None) -> np.ndarray:
        """``(eta + mu_b |xi|^2) u - mu_b d_y^2 u + (i xi, d_y) pi - f`` componentwise."""
        if self.d2u is None or self.dpi is None:
            raise ValueError("this field carries no y-derivatives")
        xi = self._xi_col()
        k2 = xi[0] ** 2 + xi[1] ** 2
        res = (params.eta + params.mu_b * k2) * self.u - params.mu_b * self.d2u
        res = res + np.stack([1j * xi[0] * self.pi, 1j * xi[1] * self.pi, self.dpi])
        if f is not None:
            res = res - (f.u if isinstance(f, BulkField) else f)
        return res

    def trace(self):
        """Velocity and pressure at the first grid point (``y = 0`` for half-space fields)."""
        return self.u[..., 0], self.pi[..., 0]


def lattice_modes(grid: SpectralGrid) -> np.ndarray:
    """Wavevectors of a periodic grid stacked as ``(2, n, n)``."""
    return np.stack(grid.k)


def box_grid(extent: float, n: int) -> np.ndarray:
    """Uniform periodic grid ``y_j = -Y + 2Y j / n`` on ``[-Y, Y)``."""
    return -extent + 2.0 * extent * np.arange(n) / n


def half_grid(extent: float, m: int) -> np.ndarray:
    """Uniform grid ``0, Y/m, ..., Y`` on the closed half-line segment."""
    return extent * np.arange(m + 1) / m


def _require_shift(params: MaterialParams):
    if params.eta <= 0:
        raise ShiftError("the Stokes resolvent needs a positive shift eta")


# -- whole space ------------------------------------------------------------------


def _y_wavenumbers(y: np.ndarray) -> np.ndarray:
    n = y.size
    period = n * (y[1] - y[0])
    return 2.0 * np.pi * np.fft.fftfreq(n, period / n)


def wholespace_solve(f: BulkField, g, params: MaterialParams) -> BulkField:
    """Solve the shifted Stokes system in the whole space, periodic in ``y``.

    ``f.y`` must be a uniform periodic grid (see :func:`box_grid`). The pressure
    is ``(mu_b + eta/|k|^2) g - i k . f / |k|^2`` with ``k = (xi, k_y)`` and the
    velocity ``(f - i k pi) / (eta + mu_b |k|^2)``; the ``k = 0`` pressure is gauged to 0.
    """
    _require_shift(params)
    y = np.asarray(f.y, dtype=float)
    g = np.broadcast_to(np.asarray(g, dtype=complex), f.pi.shape if f.pi is not None else f.u.shape[1:])
    ky = _y_wavenumbers(y)
    workers = fft_workers()
    fh = sfft.fft(f.u, axis=-1, workers=workers)
    gh = sfft.fft(g, axis=-1, workers=workers)

    xi = f.xi[..., None]
    k = np.broadcast_arrays(xi[0], xi[1], ky)
    k = np.stack([np.asarray(c, dtype=float) for c in k])
    k2 = np.sum(k * k, axis=0)
    zero = k2 == 0
    scale = max(float(np.max(np.abs(gh))), 1.0)
    if np.any(np.abs(gh[zero]) > COMPAT_TOL * scale * y.size):
        raise CompatibilityError("divergence datum must have zero mean (g(0) = 0)")
    inv_k2 = np.where(zero, 0.0, 1.0 / np.where(zero, 1.0, k2))

    k_dot_f = np.sum(k * fh, axis=0)
    pih = (params.mu_b + params.eta * inv_k2) * gh - 1j * k_dot_f * inv_k2
    pih = np.where(zero, 0.0, pih)
    uh = (fh - 1j * k * pih) / (params.eta + params.mu_b * k2)

    def back(a):
        return sfft.ifft(a, axis=-1, workers=workers)

    iky = 1j * ky
    return BulkField(
        xi=f.xi,
        y=y,
        u=back(uh),
        pi=back(pih),
        du=back(iky * uh),
        d2u=back(-(ky**2) * uh),
        dpi=back(iky * pih),
    )


# -- closed-form half-space profiles ---------------------------------------------


def _mode_quantities(xi, params: MaterialParams):
    xi = np.asarray(xi, dtype=float)
    smu = np.sqrt(params.mu_b)
    kmag = np.sqrt(np.sum(xi * xi, axis=0))
    zmag = smu * kmag
    varpi = np.sqrt(params.eta + zmag * zmag)
    return xi, smu, kmag, zmag, varpi


def homogeneous_profile(xi, zv, zw, y, params: MaterialParams) -> BulkField:
    """Decaying solution of the homogeneous system on ``y >= 0`` with coefficients ``(zv, zw)``.

    ``v = varpi zv E1 - i zeta zw E2``, ``w = i zeta . zv E1 + |zeta| zw E2``,
    ``pi = eta sqrt(mu_b) zw E2`` with ``E1 = exp(-varpi y / sqrt(mu_b))``,
    ``E2 = exp(-|xi| y)``.
    """
    xi, smu, kmag, zmag, varpi = _mode_quantities(xi, params)
    y = np.asarray(y, dtype=float)
    zv = np.asarray(zv, dtype=complex)[..., None]
    zw = np.asarray(zw, dtype=complex)[..., None]
    zeta = (smu * xi)[..., None]
    r1 = (varpi / smu)[..., None]
    r2 = kmag[..., None]
    e1 = np.exp(-r1 * y)
    e2 = np.exp(-r2 * y)
    izeta_zv = 1j * (zeta[0] * zv[0] + zeta[1] * zv[1])

    def fields(d1, d2):
        v = varpi[..., None] * zv * d1 - 1j * zeta * zw * d2
        w = izeta_zv * d1 + zmag[..., None] * zw * d2
        pi = params.eta * smu * zw * d2
        return np.concatenate([v, w[None]]), pi

    u, pi = fields(e1, e2)
    du, dpi = fields(-r1 * e1, -r2 * e2)
    d2u, _ = fields(r1 * r1 * e1, r2 * r2 * e2)
    return BulkField(xi=xi, y=y, u=u, pi=pi, du=du, d2u=d2u, dpi=dpi)


def halfspace_dirichlet_coefficients(xi, g_tau, g_nu, params: MaterialParams):
    """Coefficients ``(zv, zw)`` matching velocity traces ``v = g_tau``, ``w = g_nu`` at ``y = 0``.

    Uses ``varpi - |zeta| = eta / (varpi + |zeta|)`` to avoid cancellation.
    Mode ``xi = 0`` admits only ``g_nu = 0``; its tangential trace decays with ``E1``.
    """
    _require_shift(params)
    xi, smu, kmag, zmag, varpi = _mode_quantities(xi, params)
    g_tau = np.asarray(g_tau, dtype=complex)
    g_nu = np.asarray(g_nu, dtype=complex)
    zero = kmag == 0
    if np.any(np.abs(g_nu[zero]) > 0):
        raise ZeroModeError("a normal velocity trace at xi = 0 cannot decay; it is fixed by the gauge")
    safe_z = np.where(zero, 1.0, zmag)
    unit = smu * xi / safe_z
    g_along = np.sum(unit * g_tau, axis=0)
    inv_gap = (varpi + zmag) / params.eta
    zw = np.where(zero, 0.0, (varpi * g_nu - 1j * zmag * g_along) * inv_gap / safe_z)
    along = varpi * (g_along + 1j * g_nu) * inv_gap
    # tangential coefficient: along-zeta part and the part orthogonal to zeta
    zv = (g_tau - unit * g_along) / varpi + np.where(zero, 0.0, unit * along / varpi)
    return zv, zw


def halfspace_dirichlet_solve(xi, g_tau, g_nu, params: MaterialParams, y) -> BulkField:
    """Homogeneous half-space Stokes flow with prescribed velocity trace, sampled at ``y >= 0``."""
    zv, zw = halfspace_dirichlet_coefficients(xi, g_tau, g_nu, params)
    return homogeneous_profile(xi, zv, zw, y, params)


# -- reflection and the pressure-trace problem ------------------------------------


def reflect_extend(values, parity: str, axis: int = -1) -> np.ndarray:
    """Extend samples on ``y = 0, dy, ..., Y`` to the periodic box grid on ``[-Y, Y)``.

    ``parity`` is ``"odd"`` or ``"even"``. The input has ``m + 1`` samples along
    ``axis``; the output has ``2 m`` samples matching :func:`box_grid` ``(Y, 2m)``.
    An odd extension sets the value at ``y = 0`` (and at ``y = -Y``) to zero.
    """
    if parity not in ("odd", "even"):
        raise ValueError(f"parity must be 'odd' or 'even', got {parity!r}")
    a = np.moveaxis(np.asarray(values), axis, -1)
    sign = -1.0 if parity == "odd" else 1.0
    upper = a[..., :-1].copy()
    lower = sign * a[..., :0:-1]
    if parity == "odd":
        upper[..., 0] = 0.0
        lower[..., 0] = 0.0
    out = np.concatenate([lower, upper], axis=-1)
    return np.moveaxis(out, -1, axis)


def halfspace_pressure_trace_solve(f: BulkField, g_p, g_tau, g_nu, params: MaterialParams) -> BulkField:
    """Half-space Stokes flow with tangential velocity trace ``g_tau`` and pressure trace ``g_nu``.

    ``f.u`` and ``g_p`` live on :func:`half_grid` ``(Y, m)``. Tangential forcing
    and ``g_p`` are reflected oddly and the normal forcing evenly; the
    whole-space solution then has zero tangential velocity and pressure traces,
    and a decaying homogeneous flow supplies the prescribed traces. The
    reflected data should be smooth across ``y = 0`` for spectral accuracy.
    """
    _require_shift(params)
    y = np.asarray(f.y, dtype=float)
    m = y.size - 1
    extent = y[-1]
    fu = np.asarray(f.u, dtype=complex)
    ext_u = np.concatenate(
        [reflect_extend(fu[:2], "odd"), reflect_extend(fu[2:], "even")], axis=0
    )
    ext_g = reflect_extend(np.asarray(g_p, dtype=complex), "odd")
    box = box_grid(extent, 2 * m)
    whole = wholespace_solve(BulkField(xi=f.xi, y=box, u=ext_u, pi=np.zeros(ext_u.shape[1:], complex)), ext_g, params)
    # box index m is y = 0; indices m..2m-1 are y = 0..Y-dy, and y = Y wraps to index 0
    idx = np.r_[np.arange(m, 2 * m), 0]

    def restrict(a):
        return None if a is None else a[..., idx]

    wu, wpi = restrict(whole.u), restrict(whole.pi)
    wdu, wd2u, wdpi = restrict(whole.du), restrict(whole.d2u), restrict(whole.dpi)
    # odd components vanish on the reflection plane; remove their roundoff traces exactly
    v0 = np.asarray(g_tau, dtype=complex) - wu[:2, ..., 0]
    p0 = np.asarray(g_nu, dtype=complex) - wpi[..., 0]

    xi, smu, kmag, zmag, varpi = _mode_quantities(f.xi, params)
    zero = kmag == 0
    if np.any(np.abs(p0[zero]) > COMPAT_TOL * max(1.0, float(np.max(np.abs(p0))))):
        raise ZeroModeError("the pressure trace at xi = 0 is a gauge constant and must vanish")
    zw = np.where(zero, 0.0, p0 / (params.eta * smu))
    zeta = smu * xi
    zv = (v0 + 1j * zeta * zw) / varpi
    hom = homogeneous_profile(f.xi, zv, zw, y, params)
    return BulkField(
        xi=f.xi,
        y=y,
        u=wu + hom.u,
        pi=wpi + hom.pi,
        du=wdu + hom.du,
        d2u=wd2u + hom.d2u,
        dpi=wdpi + hom.dpi,
    )
