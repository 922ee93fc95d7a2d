"""Time stepping of the membrane height.

The height moves with the normal interface velocity, which per mode is the
normal-to-Dirichlet multiplier ``M(xi)`` times the normal force
``-grad F(h)``. The force splits as ``A h + Q(h)``: the stiff linear part is
treated implicitly and ``Q`` explicitly. The hydrodynamic response is frozen
at the flat reference (``eta = 0`` multiplier) while the bending force is
fully nonlinear.
"""

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NoContraction, TubularViolation
from .fields import HeightField, fft2
from .geometry import (
    check_tubular,
    graph_geometry,
    helfrich_energy,
    helfrich_gradient,
    linear_symbol,
    nonlinear_remainder_Q,
    surface_area,
)
from .params import MaterialParams
from .symbols import ntd_multiplier_grid, relaxation_rate

log = logging.getLogger(__name__)

MAX_HALVINGS = 8
TAIL_WARNING = 0.1


@dataclass(frozen=True)
class SimState:
    t: float
    h: HeightField
    step: int = 0
    picard_iters: int = 0
    contraction: float = float("nan")
    dt_used: float = 0.0


@dataclass(frozen=True)
class PicardReport:
    iterations: int
    ratios: tuple
    converged: bool

    @property
    def contraction(self) -> float:
        """Largest recorded ratio of successive updates, NaN if none was measurable."""
        return max(self.ratios) if self.ratios else float("nan")


# -- linear exponential integrator ----------------------------------------------------


def linear_step(state: SimState, dt: float, params: MaterialParams, forcing=None) -> SimState:
    """Exact step of ``d/dt hhat + s hhat = fhat`` with ``s = eta + m n(|xi|)``.

    ``forcing`` is an array of coefficients or None. The zero mode uses ``s = eta``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    h = state.h
    s = relaxation_rate(h.grid.kmag, params)
    decay = np.exp(-s * dt)
    c = decay * h.coefficients
    if forcing is not None:
        # (1 - exp(-s dt)) / s, equal to dt where s = 0
        with np.errstate(divide="ignore", invalid="ignore"):
            gain = np.where(s > 0, -np.expm1(-s * dt) / np.where(s > 0, s, 1.0), dt)
        c = c + gain * np.asarray(forcing, dtype=complex)
    if params.eta == 0 and forcing is None:
        c[0, 0] = h.coefficients[0, 0]
    new_h = HeightField.from_coefficients(c, h.length)
    return replace(state, t=state.t + dt, h=new_h, step=state.step + 1, dt_used=dt)


# -- IMEX and Picard ----------------------------------------------------------------


def _frozen_operators(h: HeightField, params: MaterialParams):
    mult = ntd_multiplier_grid(h.grid.kmag, params, eta=0.0)
    return mult, linear_symbol(h.grid, params)


def _remainder_hat(h: HeightField, params: MaterialParams, remainder=None) -> np.ndarray:
    q = nonlinear_remainder_Q(h, params) if remainder is None else remainder(h)
    q_hat = h.grid.dealias(fft2(np.asarray(q, dtype=float)))
    q_hat[0, 0] = 0.0
    return q_hat


def _implicit_solve(h_old: HeightField, q_hat, dt, mult, a) -> HeightField:
    c = (h_old.coefficients - dt * mult * q_hat) / (1.0 + dt * mult * a)
    c[0, 0] = h_old.coefficients[0, 0]
    return HeightField.from_coefficients(c, h_old.length)


def imex_update(h: HeightField, dt: float, params: MaterialParams, remainder=None) -> HeightField:
    """One IMEX update without step control; raises TubularViolation on entry."""
    check_tubular(h, params)
    mult, a = _frozen_operators(h, params)
    return _implicit_solve(h, _remainder_hat(h, params, remainder), dt, mult, a)


def _with_halving(state: SimState, dt: float, params: MaterialParams, update):
    """Run ``update(h, dt)``; on TubularViolation of the result halve dt and retry."""
    check_tubular(state.h, params)
    trial = dt
    for attempt in range(MAX_HALVINGS + 1):
        result = update(state.h, trial)
        new_h = result[0] if isinstance(result, tuple) else result
        if new_h.sup_norm < params.gamma:
            return result, trial
        log.info("step rejected at dt=%g (max|h|=%.4g >= gamma); halving", trial, new_h.sup_norm)
        trial *= 0.5
    raise TubularViolation(f"step still leaves the tubular neighbourhood after {MAX_HALVINGS} halvings")


def relaxational_step_imex(state: SimState, dt: float, params: MaterialParams, remainder=None) -> SimState:
    """``hhat' = (hhat - dt M Qhat(h)) / (1 + dt M a)`` with ``a = kappa (|xi|^4 + C0^2 |xi|^2 / 2)``.

    Rejected steps (result outside the tubular neighbourhood) are retried with
    halved dt up to 8 times. ``remainder`` overrides ``Q`` (grid values).
    """
    new_h, used = _with_halving(state, dt, params, lambda h, d: imex_update(h, d, params, remainder))
    return replace(state, t=state.t + used, h=new_h, step=state.step + 1, dt_used=used,
                   picard_iters=0, contraction=float("nan"))


def picard_iterate(h: HeightField, dt: float, params: MaterialParams, tol: float = 1e-12, max_iter: int = 50,
                   remainder=None):
    """Fixed-point iteration ``h(k+1) = implicit solve with Q(h(k))`` started from the IMEX predictor.

    Returns ``(h, PicardReport)``. Ratios of successive update norms are kept
    only while the previous update is above the round-off floor.
    """
    check_tubular(h, params)
    mult, a = _frozen_operators(h, params)
    current = _implicit_solve(h, _remainder_hat(h, params, remainder), dt, mult, a)
    floor = 1e3 * np.finfo(float).eps * max(h.sup_norm, 1e-300)
    ratios = []
    above_one = 0
    prev = None
    for k in range(1, max_iter + 1):
        check_tubular(current, params)
        nxt = _implicit_solve(h, _remainder_hat(current, params, remainder), dt, mult, a)
        delta = float(np.max(np.abs(nxt.values - current.values)))
        current = nxt
        if prev is not None and prev > floor:
            ratio = delta / prev
            ratios.append(ratio)
            above_one = above_one + 1 if ratio > 1 else 0
            if above_one >= 3:
                raise NoContraction(f"update ratios exceeded 1 for 3 iterations: {ratios[-3:]}")
        if delta <= tol:
            return current, PicardReport(iterations=k, ratios=tuple(ratios), converged=True)
        prev = delta
    return current, PicardReport(iterations=max_iter, ratios=tuple(ratios), converged=False)


def picard_step(state: SimState, dt: float, params: MaterialParams, tol: float = 1e-12, max_iter: int = 50,
                remainder=None):
    """Implicit step solved by Picard iteration; returns ``(state, PicardReport)``."""
    (new_h, report), used = _with_halving(
        state, dt, params, lambda h, d: picard_iterate(h, d, params, tol, max_iter, remainder)
    )
    new_state = replace(state, t=state.t + used, h=new_h, step=state.step + 1, dt_used=used,
                        picard_iters=report.iterations, contraction=report.contraction)
    return new_state, report


# -- diagnostics ----------------------------------------------------------------------


DIAGNOSTIC_COLUMNS = ("t", "F", "D", "mean_h", "area", "max_h", "tail_fraction", "picard_iters", "contraction")


@dataclass(frozen=True)
class DiagnosticsRow:
    t: float
    F: float
    D: float
    mean_h: float
    area: float
    max_h: float
    tail_fraction: float
    picard_iters: int
    contraction: float

    def as_tuple(self):
        return tuple(getattr(self, c) for c in DIAGNOSTIC_COLUMNS)


@dataclass
class SimDiagnostics:
    """Append-only diagnostic series; ``D`` is the linearised dissipation surrogate."""

    rows: list = field(default_factory=list)

    def append(self, row: DiagnosticsRow):
        if self.rows and row.t < self.rows[-1].t:
            raise ValueError("diagnostics must be recorded in time order")
        self.rows.append(row)
        if row.tail_fraction >= TAIL_WARNING:
            log.warning("spectral tail fraction %.3g at t=%g: under-resolved", row.tail_fraction, row.t)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def __len__(self):
        return len(self.rows)


def dissipation_estimate(h: HeightField, params: MaterialParams) -> float:
    """``sum M(xi) a(xi)^2 |hhat|^2 L^2``: the rate of energy loss of the linearised flow."""
    mult, a = _frozen_operators(h, params)
    return float(np.sum(mult * a * a * np.abs(h.coefficients) ** 2)) * h.length**2


def tail_fraction(h: HeightField) -> float:
    """Share of the nonzero-mode spectral energy outside the two-thirds band."""
    power = np.abs(h.coefficients) ** 2
    power[0, 0] = 0.0
    total = float(power.sum())
    if total == 0:
        return 0.0
    return float(power[~h.grid.dealias_mask].sum()) / total


def diagnostics_record(state: SimState, params: MaterialParams) -> DiagnosticsRow:
    geom = graph_geometry(state.h)
    return DiagnosticsRow(
        t=state.t,
        F=helfrich_energy(geom, params),
        D=dissipation_estimate(state.h, params),
        mean_h=state.h.mean,
        area=surface_area(geom),
        max_h=state.h.sup_norm,
        tail_fraction=tail_fraction(state.h),
        picard_iters=state.picard_iters,
        contraction=state.contraction,
    )


def equilibrium_check(state_or_h, params: MaterialParams, tol: float):
    """Flat-torus Helfrich equation: ``grad F`` spatially constant. Returns ``(ok, residual)``."""
    h = state_or_h.h if isinstance(state_or_h, SimState) else state_or_h
    grad = helfrich_gradient(graph_geometry(h), params)
    residual = float(np.max(np.abs(grad - grad.mean())))
    return residual <= tol, residual


# -- driver --------------------------------------------------------------------------


INTEGRATORS = ("linear", "imex", "picard")


def step_count(dt: float, t_end: float) -> int:
    return max(1, math.ceil(t_end / dt - 1e-9))


def advance(state: SimState, dt: float, params: MaterialParams, integrator: str, picard_tol: float = 1e-12,
            picard_max_iter: int = 50) -> SimState:
    if integrator == "linear":
        return linear_step(state, dt, params)
    if integrator == "imex":
        return relaxational_step_imex(state, dt, params)
    if integrator == "picard":
        return picard_step(state, dt, params, picard_tol, picard_max_iter)[0]
    raise ValueError(f"unknown integrator {integrator!r}; choose from {INTEGRATORS}")


def simulate(h0: HeightField, params: MaterialParams, integrator: str, dt: float, t_end: float, cadence: int = 1,
             on_record=None, **step_options):
    """Integrate to ``t_end`` with nominal step ``dt``; the last step lands on ``t_end``.

    Diagnostics are recorded at step 0, every ``cadence`` steps and at the end;
    ``on_record(state, row)`` is called for each record. Returns ``(state, diagnostics)``.
    """
    if integrator not in INTEGRATORS:
        raise ValueError(f"unknown integrator {integrator!r}; choose from {INTEGRATORS}")
    if not (dt > 0 and t_end > 0 and cadence >= 1):
        raise ValueError("need dt > 0, t_end > 0 and cadence >= 1")
    diags = SimDiagnostics()
    state = SimState(t=0.0, h=h0)

    def record(s):
        row = diagnostics_record(s, params)
        diags.append(row)
        if on_record is not None:
            on_record(s, row)

    record(state)
    n_steps = step_count(dt, t_end)
    for i in range(1, n_steps + 1):
        target = t_end if i == n_steps else i * dt
        # rejected (halved) steps are repeated until the nominal target is reached
        while state.t < target - 1e-12 * max(1.0, t_end):
            state = advance(state, target - state.t, params, integrator, **step_options)
        state = replace(state, t=target, step=i)
        if i % cadence == 0 or i == n_steps:
            record(state)
    return state, diags
