"""Bulk velocity and pressure driven by a membrane snapshot.

The membrane exerts the normal force ``g_nu = -grad F(h)`` (zero mode removed,
it is a pressure gauge) and no tangential force. The fields follow from the
interface response of the transmission problem, stable down to ``eta = 0``.
"""

import numpy as np

from .fields import HeightField, fft2, grid_points, ifft2_real
from .geometry import graph_geometry, helfrich_gradient
from .params import MaterialParams
from .symbols import interface_response


def membrane_force_hat(h: HeightField, params: MaterialParams) -> np.ndarray:
    """Coefficients of ``-grad F(h)`` without the zero mode and the Nyquist lines."""
    grid = h.grid
    g = -fft2(helfrich_gradient(graph_geometry(h), params))
    g[0, 0] = 0.0
    m1, m2 = grid.mode_index
    g[(np.abs(m1) == grid.n // 2) | (np.abs(m2) == grid.n // 2)] = 0.0
    return g


def parse_height(token: str) -> float:
    """``"0+"`` / ``"0-"`` select one-sided traces, anything else is a float."""
    token = token.strip()
    if token in ("0+", "+0"):
        return 0.0
    if token in ("0-", "-0"):
        return -0.0
    value = float(token)
    return value


def snapshot_fields(h: HeightField, y: float, params: MaterialParams, deriv: int = 0):
    """Grid values ``(v1, v2, w, pi)`` on the plane at height ``y`` (``-0.0`` for the lower trace)."""
    grid = h.grid
    g_nu = membrane_force_hat(h, params)
    xi = np.stack(grid.k_odd)
    v, w, pi = interface_response(xi, np.zeros((2,) + g_nu.shape), g_nu, y, params, deriv=deriv)
    return ifft2_real(v[0]), ifft2_real(v[1]), ifft2_real(w), ifft2_real(pi)


def field_table(h: HeightField, y: float, params: MaterialParams) -> np.ndarray:
    """Rows ``(x1, x2, v1, v2, w, pi)`` in row-major grid order."""
    x1, x2 = grid_points(h.n, h.length)
    v1, v2, w, pi = snapshot_fields(h, y, params)
    return np.column_stack([a.ravel() for a in (x1, x2, v1, v2, w, pi)])


def transmission_residual(h: HeightField, params: MaterialParams) -> dict:
    """Interface conditions of the reconstructed fields, each as a max-norm residual.

    ``pressure_jump`` compares ``pi(0+) - pi(0-)`` with the zero-mean force
    ``-(grad F - mean)``; the others are velocity continuity, the tangential
    stress balance (no surface pressure for purely normal forcing) and
    membrane incompressibility.
    """
    grid = h.grid
    up = snapshot_fields(h, 0.0, params)
    lo = snapshot_fields(h, -0.0, params)
    dup = snapshot_fields(h, 0.0, params, deriv=1)
    dlo = snapshot_fields(h, -0.0, params, deriv=1)
    force = ifft2_real(membrane_force_hat(h, params))
    v_hat = np.stack([fft2(up[0]), fft2(up[1])])
    k1, k2 = grid.k_odd
    div_v = ifft2_real(1j * (k1 * v_hat[0] + k2 * v_hat[1]))
    lap_v = [ifft2_real(-grid.k2 * c) for c in v_hat]
    stress = [-params.mu * lap_v[c] - params.mu_b * (dup[c] - dlo[c]) for c in range(2)]
    return {
        "pressure_jump": float(np.max(np.abs(up[3] - lo[3] - force))),
        "velocity_jump": float(max(np.max(np.abs(up[c] - lo[c])) for c in range(3))),
        "tangential_stress": float(max(np.max(np.abs(s)) for s in stress)),
        "surface_divergence": float(np.max(np.abs(div_v))),
    }
