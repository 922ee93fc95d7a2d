"""Differential geometry of graph membranes over the flat periodic plane.

The membrane is the graph ``X(x) = (x, h(x))`` with unit normal
``nu = (-grad h, 1) / W`` pointing toward increasing height, ``W = sqrt(1 + |grad h|^2)``.
The second fundamental form is ``k_ab = <d_a d_b X, nu> = h_ab / W`` and ``H`` is
the trace of the Weingarten map ``g^{-1} k`` (twice the mean curvature). With
this orientation ``H ~ Laplacian(h)`` for small ``h``, the bending force
below is the exact first variation of the energy along ``nu``, and a concave
bump has ``H < 0``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BumpSlopeViolation, TubularViolation
from .fields import HeightField, SpectralGrid, TangentField, ifft2_real
from .params import MaterialParams

#: max |beta'| of :func:`bump`; attained at |s| = 1/2.
BUMP_MAX_SLOPE = 4.0


@dataclass(frozen=True)
class SurfaceGeometry:
    """Pointwise geometry of the graph of a height field.

    Arrays carry the grid on their last two axes. ``metric`` and ``metric_inv``
    have shape ``(2, 2, N, N)``, ``normal`` has shape ``(3, N, N)``.
    """

    grid: SpectralGrid
    grad_h: np.ndarray
    metric: np.ndarray
    metric_inv: np.ndarray
    area_element: np.ndarray
    second_form: np.ndarray
    H: np.ndarray
    K: np.ndarray
    normal: np.ndarray
    dealias: bool = True

    @property
    def weingarten(self) -> np.ndarray:
        return np.einsum("ac...,cb...->ab...", self.metric_inv, self.second_form)

    def laplace_beltrami(self, f: np.ndarray) -> np.ndarray:
        """``(1/sqrt g) d_a (sqrt g g^ab d_b f)`` with two-thirds dealiasing of the products."""
        grad_f = self.grid.gradient_values(f, dealias=self.dealias)
        flux = self.area_element * np.einsum("ab...,b...->a...", self.metric_inv, grad_f)
        return self.grid.divergence_values(flux, dealias=self.dealias) / self.area_element


def check_tubular(h: HeightField, params: MaterialParams) -> None:
    if h.sup_norm >= params.gamma:
        raise TubularViolation(
            f"max|h| = {h.sup_norm:.6g} is not below the tubular radius gamma = {params.gamma:.6g}"
        )


def graph_geometry(h: HeightField, dealias: bool = True) -> SurfaceGeometry:
    """Metric, curvatures and normal of the graph of ``h`` from spectral derivatives."""
    grid = h.grid
    c = h.coefficients
    h1 = ifft2_real(grid.dx(c, 0))
    h2 = ifft2_real(grid.dx(c, 1))
    h11 = ifft2_real(grid.dxx(c, 0, 0))
    h22 = ifft2_real(grid.dxx(c, 1, 1))
    h12 = ifft2_real(grid.dxx(c, 0, 1))

    w2 = 1.0 + h1 * h1 + h2 * h2
    w = np.sqrt(w2)
    metric = np.array([[1.0 + h1 * h1, h1 * h2], [h1 * h2, 1.0 + h2 * h2]])
    metric_inv = np.array([[1.0 + h2 * h2, -h1 * h2], [-h1 * h2, 1.0 + h1 * h1]]) / w2
    second = np.array([[h11, h12], [h12, h22]]) / w
    H = np.einsum("ab...,ab...->...", metric_inv, second)
    K = (h11 * h22 - h12 * h12) / (w2 * w2)
    normal = np.stack([-h1 / w, -h2 / w, 1.0 / w])
    return SurfaceGeometry(
        grid=grid,
        grad_h=np.stack([h1, h2]),
        metric=metric,
        metric_inv=metric_inv,
        area_element=w,
        second_form=second,
        H=H,
        K=K,
        normal=normal,
        dealias=dealias,
    )


def helfrich_energy(geom: SurfaceGeometry, params: MaterialParams) -> float:
    """Canham-Helfrich energy ``kappa/2 * sum (H - C0)^2 sqrt(g) dx``."""
    integrand = (geom.H - params.C0) ** 2 * geom.area_element
    return 0.5 * params.kappa * float(np.sum(integrand)) * geom.grid.cell_area


def grad_f_pointwise(H, K, lapH, params: MaterialParams):
    """Normal bending force density from curvature data.

    ``kappa * (lapH + H (H^2/2 - 2K) + C0 (2K - H C0/2))``; works on scalars or arrays.
    """
    C0 = params.C0
    return params.kappa * (lapH + H * (0.5 * H * H - 2.0 * K) + C0 * (2.0 * K - 0.5 * H * C0))


def helfrich_gradient(geom: SurfaceGeometry, params: MaterialParams) -> np.ndarray:
    """L2 gradient of the energy along the normal, on the grid.

    Pairs with the reference measure: ``dF[dh] = sum grad * dh * dx``.
    """
    lapH = geom.laplace_beltrami(geom.H)
    return grad_f_pointwise(geom.H, geom.K, lapH, params)


def linear_symbol(grid: SpectralGrid, params: MaterialParams) -> np.ndarray:
    """Multiplier ``kappa (|xi|^4 + C0^2 |xi|^2 / 2)`` of the linearised force."""
    k2 = grid.k2
    return params.kappa * (k2 * k2 + 0.5 * params.C0**2 * k2)


def linearized_A_apply(h: HeightField, params: MaterialParams) -> HeightField:
    """Linearisation at the flat plane of the bending force, ``kappa (Lap^2 h - C0^2/2 Lap h)``."""
    return HeightField.from_coefficients(linear_symbol(h.grid, params) * h.coefficients, h.length)


def nonlinear_remainder_Q(h: HeightField, params: MaterialParams, dealias: bool = True) -> np.ndarray:
    """Superlinear part of the bending force: ``grad F(h) - A h`` on the grid."""
    check_tubular(h, params)
    geom = graph_geometry(h, dealias=dealias)
    return helfrich_gradient(geom, params) - linearized_A_apply(h, params).values


def surface_divergence(v: TangentField, w: np.ndarray, geom: SurfaceGeometry) -> np.ndarray:
    """``div_g v - w H`` for a tangential part ``v`` and normal part ``w``."""
    flux = geom.area_element * v.components
    div = geom.grid.divergence_values(flux, dealias=geom.dealias) / geom.area_element
    return div - np.asarray(w) * geom.H


def surface_area(geom: SurfaceGeometry) -> float:
    return float(np.sum(geom.area_element)) * geom.grid.cell_area


# -- Hanzawa transform ----------------------------------------------------------


def _smooth_step(t):
    """C-infinity step from 0 (t <= 0) to 1 (t >= 1), with its derivative."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        u = 1.0 - t
        b = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        da = np.where(t > 0, a / np.where(t > 0, t * t, 1.0), 0.0)
        db = np.where(u > 0, b / np.where(u > 0, u * u, 1.0), 0.0)
    total = a + b
    value = a / total
    deriv = (da * b + a * db) / (total * total)
    return value, deriv


def bump(s):
    """Cut-off ``beta``: 1 on ``|s| <= 1/4``, 0 on ``|s| >= 3/4``, monotone between."""
    value, _ = _smooth_step((np.abs(np.asarray(s, dtype=float)) - 0.25) / 0.5)
    return 1.0 - value


def bump_derivative(s):
    s = np.asarray(s, dtype=float)
    _, d = _smooth_step((np.abs(s) - 0.25) / 0.5)
    return -np.sign(s) * d / 0.5


def evaluate_at(h: HeightField, x) -> np.ndarray:
    """Trigonometric interpolant of ``h`` at points ``x`` of shape ``(..., 2)``."""
    x = np.asarray(x, dtype=float)
    k1, k2 = h.grid.k
    phase = np.exp(1j * (x[..., 0, None, None] * k1 + x[..., 1, None, None] * k2))
    return np.real(np.sum(h.coefficients * phase, axis=(-2, -1)))


def hanzawa_map(h: HeightField, x, y, params: MaterialParams):
    """Flat-reference Hanzawa transform ``(x, y) -> (x, y + h(x) beta(y / gamma))``.

    ``x`` has shape ``(..., 2)`` and ``y`` broadcasts against ``x[..., 0]``.
    Returns points of shape ``(..., 3)``.
    """
    check_tubular(h, params)
    if BUMP_MAX_SLOPE * h.sup_norm >= params.gamma:
        raise BumpSlopeViolation(
            f"max|beta'| * max|h| = {BUMP_MAX_SLOPE * h.sup_norm:.6g} must stay below gamma = {params.gamma:.6g}"
        )
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    hx = evaluate_at(h, x)
    y_new = y + hx * bump(y / params.gamma)
    y_new = np.broadcast_to(y_new, hx.shape)
    return np.concatenate([np.broadcast_to(x, hx.shape + (2,)), y_new[..., None]], axis=-1)


def hanzawa_jacobian(h: HeightField, x, y, params: MaterialParams):
    """Jacobian determinant ``1 + h(x) beta'(y/gamma) / gamma`` of :func:`hanzawa_map`."""
    hx = evaluate_at(h, np.asarray(x, dtype=float))
    return 1.0 + hx * bump_derivative(np.asarray(y, dtype=float) / params.gamma) / params.gamma
