"""Fourier symbols of the double half-space transmission problem.

Per tangential wavevector ``xi`` the bulk fields on either side of the flat
membrane ``y = 0`` are combinations of the two decaying profiles
``exp(-varpi |y| / sqrt(mu_b))`` and ``exp(-|xi| |y|)`` with
``zeta = sqrt(mu_b) xi`` and ``varpi = sqrt(eta + |zeta|^2)``:

    v(y) = varpi zv E1 - i zeta zw E2
    w(y) = +-(i zeta . zv E1 + |zeta| zw E2)
    pi(y) = eta sqrt(mu_b) zw E2

with the upper/lower sign for ``y > 0`` / ``y < 0``. The membrane forcing
``(g_tau, g_nu)`` fixes the four coefficients ``zv+-, zw+-`` and the surface
pressure ``q``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import AngleError, ShiftError, SymbolZeroError, ZeroModeError
from .params import MaterialParams

SYMBOL_ZERO_TOL = 1e-14


@dataclass(frozen=True)
class ModeData:
    """One tangential wavevector with its scaled companions."""

    xi: np.ndarray
    mu_b: float
    eta: float

    def __post_init__(self):
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=float).reshape(2))

    @classmethod
    def from_params(cls, xi, params: MaterialParams, eta: float | None = None) -> "ModeData":
        return cls(xi, params.mu_b, params.eta if eta is None else eta)

    @property
    def xi_mag(self) -> float:
        return float(np.hypot(*self.xi))

    @property
    def zeta(self) -> np.ndarray:
        return np.sqrt(self.mu_b) * self.xi

    @property
    def zeta_mag(self) -> float:
        return float(np.sqrt(self.mu_b) * self.xi_mag)

    @property
    def varpi(self) -> float:
        return float(np.sqrt(self.eta + self.zeta_mag**2))

    def require_nonzero(self):
        if self.xi_mag == 0.0:
            raise ZeroModeError("transmission symbols are singular at xi = 0 (fixed by the gauge)")


@dataclass(frozen=True)
class TransmissionSolution:
    """Coefficients and interface traces of one transmission mode.

    ``grad_q`` stores ``i zeta q`` (the scaled surface-pressure gradient),
    ``q`` the surface pressure itself.
    """

    mode: ModeData
    g_tau: np.ndarray
    g_nu: complex
    zv_plus: np.ndarray
    zv_minus: np.ndarray
    zw_plus: complex
    zw_minus: complex
    grad_q: np.ndarray
    q: complex
    v_trace: np.ndarray
    w_trace: complex
    pi_plus_trace: complex
    pi_minus_trace: complex


def helmholtz_project(xi, a) -> np.ndarray:
    """Solenoidal part ``(I - xi xi^T / |xi|^2) a`` of a tangential Fourier vector."""
    xi = np.asarray(xi, dtype=float)
    a = np.asarray(a, dtype=complex)
    xi2 = float(xi @ xi)
    if xi2 == 0.0:
        raise ZeroModeError("Helmholtz projection is undefined at xi = 0")
    return a - xi * (xi @ a) / xi2


def _tangential_factor(mode: ModeData, params: MaterialParams) -> float:
    """``1/2 (sqrt(mu_b) varpi + mu/(2 mu_b) |zeta|^2)^-1``."""
    z2 = mode.zeta_mag**2
    return 0.5 / (np.sqrt(mode.mu_b) * mode.varpi + 0.5 * params.mu / mode.mu_b * z2)


def ntd_multiplier(mode: ModeData, params: MaterialParams) -> float:
    """Normal interface velocity per unit normal force, ``|zeta| / (2 sqrt(mu_b) varpi (varpi + |zeta|))``."""
    mode.require_nonzero()
    z = mode.zeta_mag
    return 0.5 * z / (np.sqrt(mode.mu_b) * mode.varpi * (mode.varpi + z))


def ntd_multiplier_grid(kmag: np.ndarray, params: MaterialParams, eta: float | None = None) -> np.ndarray:
    """:func:`ntd_multiplier` over an array of ``|xi|``; zero where ``xi = 0``."""
    eta = params.eta if eta is None else eta
    z = np.sqrt(params.mu_b) * np.asarray(kmag, dtype=float)
    varpi = np.sqrt(eta + z * z)
    denom = np.sqrt(params.mu_b) * varpi * (varpi + z)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(z > 0, 0.5 * z / np.where(denom > 0, denom, 1.0), 0.0)
    return out


def solve_transmission(mode: ModeData, g_tau, g_nu, params: MaterialParams) -> TransmissionSolution:
    """Closed-form solution of the transmission problem for membrane forcing ``(g_tau, g_nu)``."""
    mode.require_nonzero()
    if mode.eta <= 0:
        raise ShiftError("the coefficients zw carry 1/eta; use the trace formulas when eta = 0")
    g_tau = np.asarray(g_tau, dtype=complex).reshape(2)
    g_nu = complex(g_nu)
    smu = np.sqrt(mode.mu_b)
    zeta, zmag, varpi, eta = mode.zeta, mode.zeta_mag, mode.varpi, mode.eta

    zw_plus = 0.5 * g_nu / (eta * smu)
    zw_minus = -zw_plus
    sol_part = _tangential_factor(mode, params) * helmholtz_project(mode.xi, g_tau)
    jump_part = 0.5j * zeta * g_nu / (eta * smu)
    zv_plus = (sol_part + jump_part) / varpi
    zv_minus = (sol_part - jump_part) / varpi

    izeta = 1j * zeta
    # i zeta q / sqrt(mu_b) = -eta sqrt(mu_b) (i zeta/|zeta|)(zw+ + zw-) - (i zeta (x) i zeta / |zeta|^2) g_tau
    grad_q = smu * (-eta * smu * izeta / zmag * (zw_plus + zw_minus) - izeta * (izeta @ g_tau) / zmag**2)
    q = -1j * (zeta @ g_tau) * smu / zmag**2

    return TransmissionSolution(
        mode=mode,
        g_tau=g_tau,
        g_nu=g_nu,
        zv_plus=zv_plus,
        zv_minus=zv_minus,
        zw_plus=zw_plus,
        zw_minus=zw_minus,
        grad_q=grad_q,
        q=q,
        v_trace=sol_part,
        w_trace=ntd_multiplier(mode, params) * g_nu,
        pi_plus_trace=eta * smu * zw_plus,
        pi_minus_trace=eta * smu * zw_minus,
    )


def reconstruct_fields(sol: TransmissionSolution, y, deriv: int = 0):
    """Bulk fields ``(v, w, pi)`` (or their ``deriv``-th y-derivative) at heights ``y != 0``.

    ``v`` has shape ``(2,) + y.shape``; ``w`` and ``pi`` have shape ``y.shape``.
    """
    y = np.asarray(y, dtype=float)
    if np.any(y == 0):
        raise ValueError("fields are two-sided at y = 0; use the stored traces or y = +-0.0 limits")
    mode = sol.mode
    smu = np.sqrt(mode.mu_b)
    r1 = mode.varpi / smu
    r2 = mode.xi_mag
    side = np.sign(y)
    upper = y > 0
    # d^k/dy^k exp(-r |y|) = (-r side)^k exp(-r |y|)
    e1 = (-r1 * side) ** deriv * np.exp(-r1 * np.abs(y))
    e2 = (-r2 * side) ** deriv * np.exp(-r2 * np.abs(y))
    shape = (2,) + (1,) * y.ndim
    zv = np.where(upper, sol.zv_plus.reshape(shape), sol.zv_minus.reshape(shape))
    zw = np.where(upper, sol.zw_plus, sol.zw_minus)
    izeta = 1j * mode.zeta
    zeta_col = izeta.reshape((2,) + (1,) * y.ndim)
    v = mode.varpi * zv * e1 - zeta_col * zw * e2
    w = side * (np.einsum("i,i...->...", izeta, zv) * e1 + mode.zeta_mag * zw * e2)
    pi = mode.eta * smu * zw * e2
    return v, w, pi


def _expm1_over(eta, c):
    """``expm1(-eta c) / eta`` with its limit ``-c`` at ``eta = 0``."""
    c = np.asarray(c, dtype=float)
    if eta == 0:
        return -c
    return np.expm1(-eta * c) / eta


def interface_response(xi, g_tau, g_nu, y, params: MaterialParams, deriv: int = 0):
    """Bulk fields driven by membrane forcing, stable down to ``eta = 0``.

    Same fields as ``reconstruct_fields(solve_transmission(...))`` but written
    through ``(E1 - E2)/eta`` so the ``eta -> 0`` limit is removable. ``xi``
    has shape ``(2, ...)`` (any mode grid), ``g_tau`` shape ``(2, ...)``,
    ``g_nu`` shape ``(...)``; ``y`` is a nonzero scalar, or ``+0.0``/``-0.0``
    for one-sided traces. Modes with ``xi = 0`` return zero (pressure gauge).
    Only ``deriv`` in {0, 1} is supported.
    """
    if deriv not in (0, 1):
        raise ValueError("deriv must be 0 or 1")
    xi = np.asarray(xi, dtype=float)
    g_tau = np.asarray(g_tau, dtype=complex)
    g_nu = np.asarray(g_nu, dtype=complex)
    y = float(y)
    side = -1.0 if np.signbit(y) else 1.0
    ay = abs(y)
    eta = params.eta
    mu_b = params.mu_b
    smu = np.sqrt(mu_b)

    kmag = np.sqrt(np.sum(xi * xi, axis=0))
    nonzero = kmag > 0
    safe_k = np.where(nonzero, kmag, 1.0)
    zeta = smu * xi
    zmag = smu * kmag
    varpi = np.sqrt(eta + zmag * zmag)
    safe_varpi = np.where(nonzero, varpi, 1.0)
    r1 = safe_varpi / smu
    r2 = safe_k
    e1 = np.exp(-r1 * ay)
    e2 = np.exp(-r2 * ay)
    # (E1 - E2)/eta with varpi - |zeta| = eta / (varpi + |zeta|)
    gap = ay / ((safe_varpi + zmag) * smu)
    d12 = e2 * _expm1_over(eta, gap)
    if deriv:
        # d/d|y| of e1, e2 and d12
        de1 = -r1 * e1
        de2 = -r2 * e2
        dgap = 1.0 / ((safe_varpi + zmag) * smu)
        dd12 = de2 * _expm1_over(eta, gap) - e2 * np.exp(-eta * gap) * dgap
        e1, e2, d12 = de1 * side, de2 * side, dd12 * side

    # solenoidal tangential response, identical on both sides
    proj_g = g_tau - xi * np.sum(xi * g_tau, axis=0) / (safe_k * safe_k)
    tang = 0.5 / (smu * safe_varpi + 0.5 * params.mu / mu_b * zmag * zmag)
    v = tang * proj_g * e1
    # normal response: odd tangential velocity, even normal velocity, odd pressure
    amp = g_nu / (2.0 * smu)
    v = v + side * 1j * zeta * amp * d12
    w = zmag * amp * (-d12 + e1 / (safe_varpi * (safe_varpi + zmag)))
    pi = side * 0.5 * g_nu * e2
    mask = nonzero
    return np.where(mask, v, 0.0), np.where(mask, w, 0.0), np.where(mask, pi, 0.0)


# -- boundary symbol of the height evolution --------------------------------------


@dataclass(frozen=True)
class BoundarySymbolEval:
    """``s = lambda_eta + m n`` and the bounded symbols ``phi = lambda_eta/s``, ``psi = n/s``."""

    lam: np.ndarray
    z: np.ndarray
    s: np.ndarray
    m: np.ndarray
    n: np.ndarray
    phi: np.ndarray
    psi: np.ndarray

    @property
    def rate(self) -> np.ndarray:
        """``m n``, the relaxation rate of the mode."""
        return self.m * self.n


def _m_n(z, params: MaterialParams, eta: float):
    z = np.asarray(z, dtype=complex)
    alpha = params.alpha
    if eta == 0:
        # varpi = z on the right half-plane
        return np.full(z.shape, 0.5 * alpha, dtype=complex), z**3
    varpi = np.sqrt(eta + z * z)
    return alpha * varpi / (varpi + z), z**5 / varpi**2


def boundary_symbol(lam, xi_mag, params: MaterialParams, scaled: bool = False, eta: float | None = None) -> BoundarySymbolEval:
    """Evaluate ``s(lambda, z) = lambda + eta + m(z) n(z)``.

    ``xi_mag`` is ``|xi|`` (real) unless ``scaled`` is set, in which case it is
    the scaled argument ``z = sqrt(mu_b) |xi|`` and may be complex.
    """
    eta = params.eta if eta is None else eta
    lam = np.asarray(lam, dtype=complex)
    z = np.asarray(xi_mag, dtype=complex)
    if not scaled:
        z = np.sqrt(params.mu_b) * z
    lam, z = np.broadcast_arrays(lam, z)
    m, n = _m_n(z, params, eta)
    lam_eta = lam + eta
    s = lam_eta + m * n
    if np.any(np.abs(s) < SYMBOL_ZERO_TOL):
        raise SymbolZeroError("boundary symbol vanishes; lambda is outside the admissible sector")
    return BoundarySymbolEval(lam=lam, z=z, s=s, m=m, n=n, phi=lam_eta / s, psi=n / s)


def relaxation_rate(kmag, params: MaterialParams, eta: float | None = None) -> np.ndarray:
    """Real rate ``eta + m n (|xi|)`` of the linear height evolution, array-valued."""
    eta = params.eta if eta is None else eta
    z = np.sqrt(params.mu_b) * np.asarray(kmag, dtype=float)
    m, n = _m_n(z, params, eta)
    return eta + (m * n).real


@dataclass(frozen=True)
class SectorReport:
    theta: float
    vartheta: float
    n_samples: int
    min_abs_s: float
    ratio_constant: float
    worst_lambda: complex
    worst_z: complex
    zero_free: bool
    max_abs_phi: float
    max_abs_psi: float
    min_abs_m: float


def sector_samples(angle: float, n_moduli: int = 40, n_args: int = 9, modulus_range=(1e-6, 1e6)) -> np.ndarray:
    """Log-spaced moduli times equispaced arguments in ``[-angle, angle]`` (boundaries included)."""
    r = np.logspace(np.log10(modulus_range[0]), np.log10(modulus_range[1]), n_moduli)
    phi = np.linspace(-angle, angle, n_args)
    return (r[:, None] * np.exp(1j * phi[None, :])).ravel()


def check_angles(theta: float, vartheta: float) -> None:
    if not (np.pi / 2 < theta < np.pi):
        raise AngleError(f"theta = {theta} must lie in (pi/2, pi)")
    if not (0 < 9 * vartheta < np.pi - theta):
        raise AngleError(f"need 0 < 9*vartheta < pi - theta; got 9*vartheta = {9 * vartheta}, pi - theta = {np.pi - theta}")


def sector_check(theta: float, vartheta: float, params: MaterialParams, n_moduli: int = 40, n_args: int = 9,
                 modulus_range=(1e-6, 1e6), lam_samples=None, z_samples=None) -> SectorReport:
    """Empirical lower bound of ``|s| / (|lambda_eta| + |m n|)`` over sampled sectors.

    ``lam_samples`` / ``z_samples`` override the default log-polar grids.
    """
    check_angles(theta, vartheta)
    lam = sector_samples(theta, n_moduli, n_args, modulus_range) if lam_samples is None else np.asarray(lam_samples, dtype=complex)
    z = sector_samples(vartheta, n_moduli, n_args, modulus_range) if z_samples is None else np.asarray(z_samples, dtype=complex)
    ev = boundary_symbol(lam[:, None], z[None, :], params, scaled=True)
    abs_s = np.abs(ev.s)
    lam_eta = np.abs(ev.lam + params.eta)
    ratio = abs_s / (lam_eta + np.abs(ev.rate))
    worst = np.unravel_index(np.argmin(ratio), ratio.shape)
    return SectorReport(
        theta=theta,
        vartheta=vartheta,
        n_samples=int(ratio.size),
        min_abs_s=float(abs_s.min()),
        ratio_constant=float(ratio.min()),
        worst_lambda=complex(lam[worst[0]]),
        worst_z=complex(z[worst[1]]),
        zero_free=bool(np.all(abs_s >= SYMBOL_ZERO_TOL)),
        max_abs_phi=float(np.abs(ev.phi).max()),
        max_abs_psi=float(np.abs(ev.psi).max()),
        min_abs_m=float(np.abs(ev.m).min()),
    )
