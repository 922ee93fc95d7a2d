"""Verification suites comparing the spectral path against the oracles.

Each suite returns :class:`ReportRow` records; a suite passes iff every row
passes. Tolerances are the acceptance thresholds.
"""

from dataclasses import dataclass

import numpy as np

from .bulk import transmission_residual
from .config import RunConfig
from .evolution import SimState, linear_step, relaxational_step_imex
from .fields import random_smooth, single_mode
from .oracle import BVPConfig, fd_energy_gradient, halfspace_dirichlet_oracle, ode_transmission_oracle
from .params import MaterialParams
from .stokes import (
    BulkField,
    box_grid,
    half_grid,
    halfspace_dirichlet_solve,
    halfspace_pressure_trace_solve,
    homogeneous_profile,
    wholespace_solve,
)
from .symbols import ModeData, boundary_symbol, sector_check, solve_transmission

REPORT_COLUMNS = ("case", "quantity", "computed", "reference", "rel_error", "tolerance", "passed")
SUITES = ("symbols", "stokes", "gradient", "dispersion", "sector")


@dataclass(frozen=True)
class ReportRow:
    case: str
    quantity: str
    computed: float
    reference: float
    rel_error: float
    tolerance: float
    passed: bool

    def as_tuple(self):
        return (self.case, self.quantity, self.computed, self.reference, self.rel_error, self.tolerance,
                "pass" if self.passed else "fail")


def _rel(a, b) -> float:
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    b = np.atleast_1d(np.asarray(b, dtype=complex))
    scale = max(float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(a - b))) / scale


def _row(case, quantity, computed, reference, tol) -> ReportRow:
    err = _rel(computed, reference)
    return ReportRow(case, quantity, float(np.max(np.abs(computed))), float(np.max(np.abs(reference))), err, tol,
                     bool(err <= tol))


def _bound_row(case, quantity, value, limit, upper=True) -> ReportRow:
    """Pass iff ``value <= limit`` (``upper``) or ``value >= limit``."""
    ok = value <= limit if upper else value >= limit
    return ReportRow(case, quantity, float(value), float(limit), float("nan"), float(limit), bool(ok))


# -- symbols ----------------------------------------------------------------------------


def random_tuples(n: int, seed: int):
    """Parameter/mode/data tuples with ``eta / (mu_b |xi|^2)`` in [0.1, 0.8].

    That window keeps both decay lengths of a mode within a factor ~1.35 of each
    other, so the oracle's uniform grid resolves both.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        mu_b = rng.uniform(0.5, 2.0)
        mu = rng.uniform(0.0, 2.0)
        kappa = rng.uniform(0.5, 2.0)
        angle = rng.uniform(0.0, 2.0 * np.pi)
        mag = rng.uniform(1.0, 3.0)
        xi = mag * np.array([np.cos(angle), np.sin(angle)])
        eta = mu_b * mag**2 * rng.uniform(0.1, 0.8)
        g_tau = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        g_nu = complex(rng.standard_normal(), rng.standard_normal())
        out.append((MaterialParams(mu_b=mu_b, mu=mu, kappa=kappa, eta=eta), xi, g_tau, g_nu))
    return out


def _transmission_vector(sol) -> np.ndarray:
    return np.concatenate([sol.v_trace, [sol.w_trace, sol.pi_plus_trace, sol.pi_minus_trace]])


def suite_symbols(cfg: RunConfig):
    rows = []
    opts = cfg.verify
    tol = 1e-4
    for i, (params, xi, g_tau, g_nu) in enumerate(random_tuples(opts.n_tuples, opts.seed)):
        params = params.replace(alpha_scale=cfg.params.alpha_scale)
        mode = ModeData.from_params(xi, params)
        sol = solve_transmission(mode, g_tau, g_nu, params)
        levels = [opts.bvp_m, 2 * opts.bvp_m] if opts.refine else [opts.bvp_m]
        errors = []
        for level, m in enumerate(levels):
            ref = ode_transmission_oracle(mode, g_tau, g_nu, BVPConfig(m), params)
            case = f"tuple{i:02d}/M{m}"
            tol_m = tol / 4**level
            rows.append(_row(case, "traces", _transmission_vector(sol), _transmission_vector(ref), tol_m))
            rows.append(_row(case, "zv_plus", sol.zv_plus, ref.zv_plus, tol_m))
            rows.append(_row(case, "zw_plus", sol.zw_plus, ref.zw_plus, tol_m))
            rows.append(_row(case, "grad_q", sol.grad_q, ref.grad_q, tol_m))
            # boundary-symbol rate: [w] / g_nu times kappa |xi|^4, plus the shift
            rate_ref = params.eta + (ref.w_trace / g_nu).real * params.kappa * float(xi @ xi) ** 2
            rate = boundary_symbol(0.0, np.hypot(*xi), params).s.real
            rows.append(_row(case, "symbol_rate", rate, rate_ref, tol_m))
            errors.append(_rel(_transmission_vector(sol), _transmission_vector(ref)))
        if len(errors) == 2:
            order = np.log2(errors[0] / errors[1])
            rows.append(_bound_row(f"tuple{i:02d}", "observed_order", order, 1.8, upper=False))
    return rows


# -- stokes ----------------------------------------------------------------------------


def _manufactured_modes():
    return np.array([[0.0, 1.0, -2.0, 0.5, 1.5], [0.0, 0.5, 1.0, -3.0, 1.5]])


def _stokes_forcing(xi, u, du, d2u, pi, dpi, params):
    k2 = (xi**2).sum(0)[..., None]
    f = (params.eta + params.mu_b * k2) * u - params.mu_b * d2u
    f = f + np.stack([1j * xi[0][..., None] * pi, 1j * xi[1][..., None] * pi, dpi])
    g = 1j * (xi[0][..., None] * u[0] + xi[1][..., None] * u[1]) + du[2]
    return f, g


def manufactured_wholespace(params, seed: int, extent=12.0, n=256):
    rng = np.random.default_rng(seed)
    xi = _manufactured_modes()
    y = box_grid(extent, n)
    gauss = np.exp(-(y - 0.3) ** 2)
    d1 = -2 * (y - 0.3) * gauss
    d2 = (4 * (y - 0.3) ** 2 - 2) * gauss
    a = rng.standard_normal((3, xi.shape[1])) + 1j * rng.standard_normal((3, xi.shape[1]))
    b = rng.standard_normal(xi.shape[1]) + 1j * rng.standard_normal(xi.shape[1])
    b[0] = 0.0  # the xi = 0 pressure carries the zero-mean gauge
    u, du, d2u = a[..., None] * gauss, a[..., None] * d1, a[..., None] * d2
    pi, dpi = b[:, None] * gauss, b[:, None] * d1
    f, g = _stokes_forcing(xi, u, du, d2u, pi, dpi, params)
    sol = wholespace_solve(BulkField(xi, y, f, np.zeros_like(pi)), g, params)
    # pressure at xi = 0 is defined up to its y-mean
    return sol, u, pi - pi.mean(axis=-1, keepdims=True) * (np.hypot(*xi) == 0)[:, None], f, g


def manufactured_dirichlet(params, seed: int):
    rng = np.random.default_rng(seed)
    xi = _manufactured_modes()[:, 1:]
    zv = rng.standard_normal((2, xi.shape[1])) + 1j * rng.standard_normal((2, xi.shape[1]))
    zw = rng.standard_normal(xi.shape[1]) + 1j * rng.standard_normal(xi.shape[1])
    y = np.linspace(0.0, 8.0, 81)
    exact = homogeneous_profile(xi, zv, zw, y, params)
    sol = halfspace_dirichlet_solve(xi, exact.u[:2, ..., 0], exact.u[2, ..., 0], params, y)
    return sol, exact


def manufactured_pressure_trace(params, seed: int, extent=10.0, m=400):
    """Odd tangential velocity/pressure and even normal velocity plus a decaying homogeneous flow."""
    rng = np.random.default_rng(seed)
    xi = _manufactured_modes()[:, 1:]
    nm = xi.shape[1]
    y = half_grid(extent, m)
    gauss = np.exp(-y**2)
    odd, dodd, d2odd = y * gauss, (1 - 2 * y**2) * gauss, (4 * y**3 - 6 * y) * gauss
    even, deven, d2even = gauss, -2 * y * gauss, (4 * y**2 - 2) * gauss
    a = rng.standard_normal((3, nm)) + 1j * rng.standard_normal((3, nm))
    b = rng.standard_normal(nm) + 1j * rng.standard_normal(nm)
    u = np.concatenate([a[:2, :, None] * odd, (a[2][:, None] * even)[None]])
    du = np.concatenate([a[:2, :, None] * dodd, (a[2][:, None] * deven)[None]])
    d2u = np.concatenate([a[:2, :, None] * d2odd, (a[2][:, None] * d2even)[None]])
    pi, dpi = b[:, None] * odd, b[:, None] * dodd
    f, g = _stokes_forcing(xi, u, du, d2u, pi, dpi, params)
    zv = rng.standard_normal((2, nm)) + 1j * rng.standard_normal((2, nm))
    zw = rng.standard_normal(nm) + 1j * rng.standard_normal(nm)
    hom = homogeneous_profile(xi, zv, zw, y, params)
    exact_u, exact_pi = u + hom.u, pi + hom.pi
    sol = halfspace_pressure_trace_solve(BulkField(xi, y, f, None), g, exact_u[:2, ..., 0], exact_pi[..., 0], params)
    return sol, exact_u, exact_pi, f, g


def suite_stokes(cfg: RunConfig):
    rows = []
    tol = 1e-8
    base = cfg.params if cfg.params.eta > 0 else cfg.params.replace(eta=0.5)
    for seed in range(3):
        params = base.replace(mu_b=base.mu_b * (1 + 0.3 * seed))
        case = f"seed{seed}"
        sol, u, pi, f, g = manufactured_wholespace(params, seed)
        rows.append(_row(case, "wholespace_u", sol.u, u, tol))
        rows.append(_row(case, "wholespace_pi", sol.pi, pi, tol))
        momentum = float(np.max(np.abs(sol.momentum_residual(params, f)))) / float(np.max(np.abs(f)))
        rows.append(_bound_row(case, "wholespace_momentum", momentum, tol))
        sol, exact = manufactured_dirichlet(params, seed)
        rows.append(_row(case, "dirichlet_u", sol.u, exact.u, tol))
        rows.append(_row(case, "dirichlet_pi", sol.pi, exact.pi, tol))
        sol, eu, epi, f, g = manufactured_pressure_trace(params, seed)
        rows.append(_row(case, "pressure_trace_u", sol.u, eu, tol))
        rows.append(_row(case, "pressure_trace_pi", sol.pi, epi, tol))
        rows.append(_bound_row(case, "pressure_trace_divergence", float(np.max(np.abs(sol.divergence() - g))), tol))
    # closed-form half-space Dirichlet against the finite-difference oracle
    for i, (params, xi, g_tau, g_nu) in enumerate(random_tuples(3, cfg.verify.seed + 1)):
        ref = halfspace_dirichlet_oracle(xi, g_tau, g_nu, BVPConfig(cfg.verify.bvp_m), params)
        sol = halfspace_dirichlet_solve(xi[:, None], g_tau[:, None], np.array([g_nu]), params, ref.y)
        rows.append(_row(f"oracle{i}", "dirichlet_v", sol.u[:2, 0], ref.v, 1e-4))
        rows.append(_row(f"oracle{i}", "dirichlet_pi_trace", sol.pi[0, 0], ref.pi_trace, 1e-4))
    # interface conditions of snapshot fields in the linear regime
    h = random_smooth(cfg.n, cfg.length, seed=cfg.verify.seed, amplitude=1e-6 * cfg.params.gamma)
    res = transmission_residual(h, cfg.params)
    for name, value in res.items():
        rows.append(_bound_row("snapshot", name, value, tol))
    return rows


# -- gradient ---------------------------------------------------------------------------


def suite_gradient(cfg: RunConfig, eps_list=(1e-2, 5e-3, 2.5e-3, 1e-3)):
    rows = []
    params = cfg.params
    for i in range(5):
        h = random_smooth(cfg.n, cfg.length, seed=100 + i, amplitude=params.gamma / 4, max_mode=cfg.n // 8)
        dh = random_smooth(cfg.n, cfg.length, seed=200 + i, amplitude=1.0, max_mode=cfg.n // 8)
        rep = fd_energy_gradient(h, dh, list(eps_list), params)
        rows.append(_bound_row(f"field{i}", "fd_slope", rep.slope, 1.9, upper=False))
    return rows


# -- dispersion ------------------------------------------------------------------------------


DISPERSION_MODES = ((1, 0), (0, 1), (1, 1), (2, 0), (2, 1), (1, 3), (3, 2), (4, 0))


def fitted_rate(h0, params, rate, integrator="imex", steps=20, r_dt=1e-3):
    """Log-amplitude slope of a single-mode run with ``rate * dt = r_dt``."""
    dt = r_dt / rate
    state = SimState(0.0, h0)
    idx = np.unravel_index(np.argmax(np.abs(h0.coefficients)), h0.coefficients.shape)
    amps = [abs(h0.coefficients[idx])]
    traj = [h0.values]
    for _ in range(steps):
        if integrator == "imex":
            state = relaxational_step_imex(state, dt, params)
        else:
            state = linear_step(state, dt, params)
        amps.append(abs(state.h.coefficients[idx]))
        traj.append(state.h.values)
    t = dt * np.arange(steps + 1)
    return -np.polyfit(t, np.log(amps), 1)[0], np.array(traj)


def suite_dispersion(cfg: RunConfig):
    rows = []
    params = cfg.params.replace(eta=0.0, C0=0.0)
    other = params.replace(mu=10.0 * params.mu + 1.0)
    amplitude = 1e-8 * params.gamma
    for mode in DISPERSION_MODES:
        xi = 2 * np.pi * np.hypot(*mode) / cfg.length
        expected = params.kappa * xi**3 / (4.0 * params.mu_b)
        h0 = single_mode(cfg.n, cfg.length, mode, amplitude)
        rate, traj = fitted_rate(h0, params, expected)
        rows.append(_row(f"mode{mode[0]}_{mode[1]}", "imex_rate", rate, expected, 1e-3))
        _, traj_other = fitted_rate(h0, other, expected)
        rows.append(_bound_row(f"mode{mode[0]}_{mode[1]}", "mu_invariance", float(np.max(np.abs(traj - traj_other))), 0.0))
        lin_rate, _ = fitted_rate(h0, params, expected, integrator="linear")
        rows.append(_row(f"mode{mode[0]}_{mode[1]}", "linear_rate", lin_rate, expected, 1e-6))
    return rows


# -- sector ---------------------------------------------------------------------------------


def suite_sector(cfg: RunConfig):
    theta, vartheta = cfg.verify.theta, cfg.verify.vartheta
    params = cfg.params
    first = sector_check(theta, vartheta, params)
    again = sector_check(theta, vartheta, params)
    case = f"theta{theta:.4f}_vartheta{vartheta:.4f}"
    rows = [
        _bound_row(case, "min_abs_s", first.min_abs_s, 0.0, upper=False),
        _bound_row(case, "ratio_constant", first.ratio_constant, 0.0, upper=False),
        _bound_row(case, "zero_free", float(first.zero_free), 1.0, upper=False),
        _row(case, "reproducible_c", again.ratio_constant, first.ratio_constant, 1e-9),
        _bound_row(case, "max_abs_phi", first.max_abs_phi, 1.0 / first.ratio_constant),
        _bound_row(case, "max_abs_psi", first.max_abs_psi, 1.0 / (first.ratio_constant * first.min_abs_m)),
    ]
    r = np.logspace(-6, 6, 40)
    real_axis = sector_check(theta, vartheta, params, lam_samples=r, z_samples=r)
    rows.append(_bound_row(case, "real_axis_ratio", real_axis.ratio_constant, 0.5, upper=False))
    return rows


def run_suite(name: str, cfg: RunConfig):
    suites = {
        "symbols": suite_symbols,
        "stokes": suite_stokes,
        "gradient": suite_gradient,
        "dispersion": suite_dispersion,
        "sector": suite_sector,
    }
    if name not in suites:
        raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
    return suites[name](cfg)
