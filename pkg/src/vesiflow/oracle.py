"""Brute-force reference solvers.

These deliberately avoid the closed-form symbols: the transmission problem is
discretised in ``y`` by second-order finite differences and solved directly,
the energy gradient is checked by central differences of the energy, and the
linear height dynamics is integrated by classical RK4 with an independently
written rate.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ShiftError, SingularSystem, StabilityError, ZeroModeError
from .fields import HeightField, fft2, ifft2_real
from .geometry import graph_geometry, helfrich_energy, helfrich_gradient
from .params import MaterialParams
from .symbols import ModeData, TransmissionSolution

#: ``exp(-DECAY_LENGTHS) ~ 1e-12``: truncation extent in slowest decay lengths.
DECAY_LENGTHS = 27.64


@dataclass(frozen=True)
class BVPConfig:
    """Finite-difference setup: ``m`` intervals per half-line on ``[0, extent]``.

    ``extent=None`` picks the smallest extent with ``exp(-slowest rate * Y) < 1e-12``.
    """

    m: int = 2000
    extent: float | None = None
    order: int = 2

    def __post_init__(self):
        if self.m < 4:
            raise ValueError("need at least 4 intervals")
        if self.order != 2:
            raise ValueError("only second-order differences are implemented")

    def resolve_extent(self, xi_mag: float, mu_b: float, eta: float) -> float:
        if self.extent is not None:
            return float(self.extent)
        slow = min(xi_mag, np.sqrt((eta + mu_b * xi_mag**2) / mu_b))
        return DECAY_LENGTHS / slow


class _Assembler:
    """Row-by-row sparse matrix builder."""

    def __init__(self, n_unknowns: int):
        self.n = n_unknowns
        self.rows, self.cols, self.vals = [], [], []
        self.rhs = []

    def add_row(self, entries, rhs=0.0):
        r = len(self.rhs)
        for c, v in entries:
            self.rows.append(r)
            self.cols.append(c)
            self.vals.append(v)
        self.rhs.append(rhs)

    def solve(self) -> np.ndarray:
        if len(self.rhs) != self.n:
            raise SingularSystem(f"assembled {len(self.rhs)} equations for {self.n} unknowns")
        mat = sp.csc_matrix((np.asarray(self.vals, dtype=complex), (self.rows, self.cols)), shape=(self.n, self.n))
        rhs = np.asarray(self.rhs, dtype=complex)
        try:
            lu = spla.splu(mat, permc_spec="COLAMD")
        except RuntimeError as exc:
            raise SingularSystem(str(exc)) from exc
        sol = lu.solve(rhs)
        if not np.all(np.isfinite(sol)):
            raise SingularSystem("direct solve produced non-finite values")
        return sol


class _Side:
    """Unknown layout of one half-line: v1, v2, w at nodes 0..m, pressure at half nodes."""

    def __init__(self, offset: int, m: int, orient: float):
        self.offset = offset
        self.m = m
        self.orient = orient  # +1 for y > 0, -1 for y < 0

    @property
    def size(self) -> int:
        return 4 * self.m + 3

    def v(self, comp: int, j: int) -> int:
        return self.offset + comp * (self.m + 1) + j

    def w(self, j: int) -> int:
        return self.offset + 2 * (self.m + 1) + j

    def p(self, j: int) -> int:
        """Pressure at ``|y| = (j + 1/2) dy``."""
        return self.offset + 3 * (self.m + 1) + j

    def unpack(self, x: np.ndarray):
        m = self.m
        base = self.offset
        v = np.stack([x[base:base + m + 1], x[base + m + 1:base + 2 * m + 2]])
        w = x[base + 2 * m + 2:base + 3 * m + 3]
        p = x[base + 3 * m + 3:base + 4 * m + 3]
        return v, w, p


def _bulk_rows(asm: _Assembler, side: _Side, xi, dy: float, mu_b: float, eta: float):
    """Interior momentum, staggered continuity and decay conditions for one side."""
    m, s = side.m, side.orient
    xi2 = float(xi @ xi)
    diag = eta + mu_b * xi2 + 2.0 * mu_b / dy**2
    off = -mu_b / dy**2
    for j in range(1, m):
        for c in range(2):
            # tangential momentum, pressure averaged from the neighbouring half nodes
            asm.add_row([
                (side.v(c, j), diag), (side.v(c, j - 1), off), (side.v(c, j + 1), off),
                (side.p(j - 1), 0.5j * xi[c]), (side.p(j), 0.5j * xi[c]),
            ])
        # normal momentum, d/dy = orient * d/d|y|
        asm.add_row([
            (side.w(j), diag), (side.w(j - 1), off), (side.w(j + 1), off),
            (side.p(j), s / dy), (side.p(j - 1), -s / dy),
        ])
    for j in range(m):
        # continuity at the half node j + 1/2
        asm.add_row([
            (side.v(0, j), 0.5j * xi[0]), (side.v(0, j + 1), 0.5j * xi[0]),
            (side.v(1, j), 0.5j * xi[1]), (side.v(1, j + 1), 0.5j * xi[1]),
            (side.w(j + 1), s / dy), (side.w(j), -s / dy),
        ])
    for c in range(2):
        asm.add_row([(side.v(c, m), 1.0)])
    asm.add_row([(side.w(m), 1.0)])


def _dy_v_at_zero(side: _Side, comp: int, dy: float):
    """One-sided second-order ``d_y v`` at ``y = 0`` for this side."""
    s = side.orient / (2.0 * dy)
    return [(side.v(comp, 0), -3.0 * s), (side.v(comp, 1), 4.0 * s), (side.v(comp, 2), -1.0 * s)]


def _pressure_at_zero(side: _Side):
    return [(side.p(0), 1.5), (side.p(1), -0.5)]


@dataclass
class TransmissionBVP:
    """Raw finite-difference solution of the transmission problem."""

    y: np.ndarray
    v: dict
    w: dict
    pi: dict
    q: complex
    extent: float


def solve_transmission_bvp(mode: ModeData, g_tau, g_nu, cfg: BVPConfig, params: MaterialParams) -> TransmissionBVP:
    """Finite-difference solve of the per-mode transmission system on ``[-Y, Y]``.

    Conditions at ``y = 0``: continuous velocity, ``mu |xi|^2 v + i xi q - mu_b [[d_y v]] = g_tau``,
    ``[[pi]] = g_nu`` and ``i xi . v = 0``; homogeneous Dirichlet data at ``y = +-Y``.
    """
    xi = np.asarray(mode.xi, dtype=float)
    xi_mag = float(np.hypot(*xi))
    if xi_mag == 0.0:
        raise ZeroModeError("the oracle system is singular at xi = 0")
    if mode.eta <= 0:
        raise ShiftError("the oracle needs a positive shift eta")
    mu_b, eta = mode.mu_b, mode.eta
    g_tau = np.asarray(g_tau, dtype=complex).reshape(2)
    m = cfg.m
    extent = cfg.resolve_extent(xi_mag, mu_b, eta)
    dy = extent / m

    upper = _Side(0, m, +1.0)
    lower = _Side(upper.size, m, -1.0)
    q_index = upper.size + lower.size
    asm = _Assembler(q_index + 1)
    for side in (upper, lower):
        _bulk_rows(asm, side, xi, dy, mu_b, eta)

    for c in range(2):
        asm.add_row([(upper.v(c, 0), 1.0), (lower.v(c, 0), -1.0)])
    asm.add_row([(upper.w(0), 1.0), (lower.w(0), -1.0)])
    asm.add_row([(upper.v(0, 0), 1j * xi[0]), (upper.v(1, 0), 1j * xi[1])])
    for c in range(2):
        jump = _dy_v_at_zero(upper, c, dy) + [(k, -v) for k, v in _dy_v_at_zero(lower, c, dy)]
        row = [(upper.v(c, 0), params.mu * xi_mag**2), (q_index, 1j * xi[c])]
        row += [(k, -mu_b * v) for k, v in jump]
        asm.add_row(row, g_tau[c])
    asm.add_row(_pressure_at_zero(upper) + [(k, -v) for k, v in _pressure_at_zero(lower)], complex(g_nu))

    x = asm.solve()
    out_v, out_w, out_pi = {}, {}, {}
    for key, side in (("+", upper), ("-", lower)):
        out_v[key], out_w[key], out_pi[key] = side.unpack(x)
    return TransmissionBVP(y=np.arange(m + 1) * dy, v=out_v, w=out_w, pi=out_pi, q=complex(x[q_index]), extent=extent)


def ode_transmission_oracle(mode: ModeData, g_tau, g_nu, cfg: BVPConfig, params: MaterialParams) -> TransmissionSolution:
    """Transmission coefficients and traces recovered from the finite-difference solve.

    Coefficients follow from the traces through the generic decaying solution:
    ``zw = pi(0) / (eta sqrt(mu_b))`` and ``zv = (v(0) + i zeta zw) / varpi`` on each side.
    """
    bvp = solve_transmission_bvp(mode, g_tau, g_nu, cfg, params)
    smu = np.sqrt(mode.mu_b)
    zeta = smu * np.asarray(mode.xi, dtype=float)
    varpi = np.sqrt(mode.eta + float(zeta @ zeta))
    v0 = bvp.v["+"][:, 0]
    w0 = bvp.w["+"][0]
    pi0 = {k: 1.5 * bvp.pi[k][0] - 0.5 * bvp.pi[k][1] for k in ("+", "-")}
    # the generic solution is mirrored below the membrane: w^- = -(i zeta.zv^- E1 + |zeta| zw^- E2)
    zw = {k: pi0[k] / (mode.eta * smu) for k in ("+", "-")}
    zv = {k: (v0 + 1j * zeta * zw[k]) / varpi for k in ("+", "-")}
    return TransmissionSolution(
        mode=mode,
        g_tau=np.asarray(g_tau, dtype=complex).reshape(2),
        g_nu=complex(g_nu),
        zv_plus=zv["+"],
        zv_minus=zv["-"],
        zw_plus=zw["+"],
        zw_minus=zw["-"],
        grad_q=1j * zeta * bvp.q,
        q=bvp.q,
        v_trace=v0,
        w_trace=w0,
        pi_plus_trace=pi0["+"],
        pi_minus_trace=pi0["-"],
    )


@dataclass
class HalfSpaceBVP:
    y: np.ndarray
    v: np.ndarray
    w: np.ndarray
    pi_half: np.ndarray
    pi_trace: complex
    extent: float

    @property
    def y_half(self) -> np.ndarray:
        return 0.5 * (self.y[1:] + self.y[:-1])


def halfspace_dirichlet_oracle(xi, g_tau, g_nu, cfg: BVPConfig, params: MaterialParams) -> HalfSpaceBVP:
    """Finite-difference solve of the half-space problem with velocity trace ``(g_tau, g_nu)``."""
    xi = np.asarray(xi, dtype=float).reshape(2)
    xi_mag = float(np.hypot(*xi))
    if xi_mag == 0.0:
        raise ZeroModeError("the oracle system is singular at xi = 0")
    if params.eta <= 0:
        raise ShiftError("the oracle needs a positive shift eta")
    g_tau = np.asarray(g_tau, dtype=complex).reshape(2)
    m = cfg.m
    extent = cfg.resolve_extent(xi_mag, params.mu_b, params.eta)
    dy = extent / m
    side = _Side(0, m, +1.0)
    asm = _Assembler(side.size)
    _bulk_rows(asm, side, xi, dy, params.mu_b, params.eta)
    for c in range(2):
        asm.add_row([(side.v(c, 0), 1.0)], g_tau[c])
    asm.add_row([(side.w(0), 1.0)], complex(g_nu))
    x = asm.solve()
    v, w, p = side.unpack(x)
    return HalfSpaceBVP(y=np.arange(m + 1) * dy, v=v, w=w, pi_half=p, pi_trace=1.5 * p[0] - 0.5 * p[1], extent=extent)


# -- energy gradient -------------------------------------------------------------


@dataclass
class FDGradientReport:
    eps: np.ndarray
    residuals: np.ndarray
    roundoff: np.ndarray
    used: np.ndarray
    slope: float
    directional: float = 0.0
    predicted: float = 0.0
    notes: list = field(default_factory=list)


def fd_energy_gradient(h: HeightField, dh: HeightField, eps_list, params: MaterialParams,
                       plateau_factor: float = 100.0) -> FDGradientReport:
    """Central differences of the energy against the gradient paired over ``dx``.

    The residual ``|(F(h + e dh) - F(h - e dh)) / 2e - sum grad F dh dx|`` should
    fall like ``e^2``. Points within ``plateau_factor`` of the round-off floor
    are excluded from the log-log fit; the slope is NaN if fewer than two remain.
    """
    eps = np.asarray(sorted(eps_list, reverse=True), dtype=float)
    peak = h.sup_norm + float(eps.max()) * dh.sup_norm
    if peak >= params.gamma:
        raise ValueError(f"perturbed field reaches max|h| = {peak:.3g} >= gamma")
    geom = graph_geometry(h)
    grad = helfrich_gradient(geom, params)
    predicted = float(np.sum(grad * dh.values)) * h.grid.cell_area
    f0 = abs(helfrich_energy(geom, params))
    residuals, roundoff = [], []
    for e in eps:
        fp = helfrich_energy(graph_geometry(h + e * dh), params)
        fm = helfrich_energy(graph_geometry(h - e * dh), params)
        residuals.append(abs((fp - fm) / (2.0 * e) - predicted))
        scale = max(abs(fp), abs(fm), f0)
        roundoff.append(np.finfo(float).eps * (scale / e + abs(predicted)))
    residuals = np.asarray(residuals)
    roundoff = np.asarray(roundoff)
    used = residuals > plateau_factor * roundoff
    notes = []
    if np.count_nonzero(used) >= 2:
        slope = float(np.polyfit(np.log(eps[used]), np.log(residuals[used]), 1)[0])
    else:
        slope = float("nan")
        notes.append("residuals at the round-off plateau; no slope fitted")
    if np.any(~used):
        notes.append(f"excluded eps {eps[~used].tolist()} (round-off plateau)")
    return FDGradientReport(eps=eps, residuals=residuals, roundoff=roundoff, used=used, slope=slope,
                            predicted=predicted, notes=notes)


# -- dense time integration ------------------------------------------------------


def _reference_rates(h: HeightField, params: MaterialParams) -> np.ndarray:
    """Per-mode decay rate ``eta + kappa |zeta|^5 / (2 mu_b^(5/2) varpi (varpi + |zeta|))``."""
    k1, k2 = h.grid.k
    zsq = params.mu_b * (k1 * k1 + k2 * k2)
    z = np.sqrt(zsq)
    varpi = np.sqrt(params.eta + zsq)
    denom = varpi * (varpi + z)
    coeff = params.kappa / (2.0 * params.mu_b ** 2.5)
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = np.where(z > 0, coeff * z**5 / np.where(denom > 0, denom, 1.0), 0.0)
    return params.eta + tail


@dataclass
class Trajectory:
    times: np.ndarray
    values: np.ndarray
    length: float

    def at(self, i: int) -> HeightField:
        return HeightField(self.values[i], self.length)


def dense_evolution_oracle(h0: HeightField, t_end: float, steps: int, params: MaterialParams,
                           stability_limit: float = 2.0) -> Trajectory:
    """Classical RK4 for ``d/dt hhat = -s(xi) hhat`` on every mode.

    Raises StabilityError unless ``dt * max s < stability_limit``.
    """
    if steps < 1:
        raise ValueError("steps must be positive")
    dt = t_end / steps
    rates = _reference_rates(h0, params)
    if dt * float(rates.max()) >= stability_limit:
        raise StabilityError(f"dt * max rate = {dt * float(rates.max()):.3g} violates the RK4 bound {stability_limit}")
    c = np.array(fft2(h0.values))
    c0 = c[0, 0]
    out = np.empty((steps + 1,) + h0.values.shape)
    out[0] = h0.values

    def rhs(a):
        return -rates * a

    for i in range(steps):
        k1 = rhs(c)
        k2 = rhs(c + 0.5 * dt * k1)
        k3 = rhs(c + 0.5 * dt * k2)
        k4 = rhs(c + dt * k3)
        c = c + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if params.eta == 0:
            c[0, 0] = c0
        out[i + 1] = ifft2_real(c)
    return Trajectory(times=np.linspace(0.0, t_end, steps + 1), values=out, length=h0.length)
