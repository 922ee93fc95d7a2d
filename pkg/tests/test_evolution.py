import logging

import numpy as np
import pytest

from vesiflow.errors import NoContraction, TubularViolation
from vesiflow.evolution import (
    DIAGNOSTIC_COLUMNS,
    SimDiagnostics,
    SimState,
    diagnostics_record,
    dissipation_estimate,
    equilibrium_check,
    linear_step,
    picard_iterate,
    picard_step,
    relaxational_step_imex,
    simulate,
    step_count,
    tail_fraction,
)
from vesiflow.fields import HeightField, fft2, random_smooth, single_mode
from vesiflow.geometry import graph_geometry, helfrich_energy
from vesiflow.params import MaterialParams
from vesiflow.symbols import relaxation_rate

L = 2 * np.pi


@pytest.mark.parametrize("mode", [(1, 0), (2, 1), (3, 3), (0, 5)])
def test_linear_step_log_decrement(mode):
    p = MaterialParams(mu_b=1.3, kappa=0.7, eta=0.2)
    h = single_mode(16, L, mode, 0.1)
    state = SimState(0.0, h)
    dt = 0.01
    for _ in range(10):
        state = linear_step(state, dt, p)
    s = float(relaxation_rate(np.array([np.hypot(*mode)]), p)[0])
    measured = -np.log(abs(state.h.coefficients[mode]) / abs(h.coefficients[mode])) / (10 * dt)
    assert abs(measured - s) < 1e-12 * max(1.0, s)


def test_linear_step_fixed_point():
    p = MaterialParams(eta=0.3)
    h0 = random_smooth(16, L, seed=1, amplitude=0.1)
    forcing = relaxation_rate(h0.grid.kmag, p) * h0.coefficients
    state = SimState(0.0, h0)
    for _ in range(5):
        state = linear_step(state, 0.05, p, forcing=forcing)
    assert np.max(np.abs(state.h.values - h0.values)) < 1e-14


def test_linear_step_mean_frozen():
    p = MaterialParams()
    h0 = HeightField(random_smooth(16, L, seed=2, amplitude=0.1).values + 0.037, L)
    state = SimState(0.0, h0)
    for _ in range(20):
        state = linear_step(state, 0.01, p)
    assert state.h.mean == h0.mean


def test_imex_matches_linear_in_linear_regime():
    p = MaterialParams()
    h0 = random_smooth(16, L, seed=3, amplitude=1e-8)
    a = relaxational_step_imex(SimState(0.0, h0), 1e-4, p)
    b = linear_step(SimState(0.0, h0), 1e-4, p)
    # implicit Euler differs from the exact exponential by O((s dt)^2) per step
    s_max = float(relaxation_rate(h0.grid.kmag, p).max())
    assert np.max(np.abs(a.h.values - b.h.values)) <= 1e-8 * (s_max * 1e-4) ** 2 + 1e-22


def test_imex_mu_independent():
    h0 = random_smooth(16, L, seed=4, amplitude=0.05)
    a = relaxational_step_imex(SimState(0.0, h0), 1e-3, MaterialParams(mu=0.0))
    b = relaxational_step_imex(SimState(0.0, h0), 1e-3, MaterialParams(mu=5.0))
    assert np.array_equal(a.h.values, b.h.values)


def test_imex_first_order_in_dt():
    p = MaterialParams()
    h0 = random_smooth(16, L, seed=5, amplitude=0.1, max_mode=3)
    t_end = 0.05

    def run(dt):
        return simulate(h0, p, "imex", dt, t_end)[0].h.values

    ref = run(t_end / 1024)
    dts = np.array([t_end / 16, t_end / 32, t_end / 64])
    errs = [np.max(np.abs(run(dt) - ref)) for dt in dts]
    slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
    assert slope >= 0.9


def test_single_mode_rate():
    p = MaterialParams(mu_b=1.5, kappa=1.2)
    h0 = single_mode(16, L, (2, 0), 1e-6)
    rate = p.kappa * 8.0 / (4 * p.mu_b)
    dt = 1e-3 / rate
    state, _ = simulate(h0, p, "imex", dt, 20 * dt)
    fitted = -np.log(state.h.coefficients[2, 0].real / h0.coefficients[2, 0].real) / state.t
    assert fitted == pytest.approx(rate, rel=6e-4)


def test_energy_decreases_and_mean_constant():
    p = MaterialParams(C0=0.2)
    h0 = random_smooth(32, L, seed=6, amplitude=0.2, max_mode=4)
    _, diags = simulate(h0, p, "imex", 1e-3, 0.1)
    F = diags.column("F")
    assert np.all(np.diff(F) <= 1e-12 * F[0])
    assert np.all(diags.column("mean_h") == diags.column("mean_h")[0])


def test_picard_linear_forcing_single_iteration():
    h0 = random_smooth(16, L, seed=7, amplitude=0.1)
    _, report = picard_iterate(h0, 1e-3, MaterialParams(), remainder=lambda h: np.zeros(h.values.shape))
    assert report.iterations == 1 and report.converged


def test_picard_contraction_scales_with_amplitude():
    p = MaterialParams()
    base = random_smooth(16, L, seed=8, amplitude=1.0, max_mode=3)
    factors = [picard_step(SimState(0.0, eps * base), 1e-3, p)[1].contraction for eps in (0.1, 0.05)]
    assert factors[1] < factors[0] < 1


def test_picard_no_contraction():
    p = MaterialParams()
    h0 = single_mode(16, L, (1, 0), 1e-6)
    # explicit gain dt M c / (1 + dt M a) = 5 on this mode: the iteration diverges
    with pytest.raises(NoContraction):
        picard_iterate(h0, 1e-3, p, remainder=lambda h: 2.002e4 * h.values, max_iter=20)


def test_tubular_guards():
    p = MaterialParams(gamma=0.5)
    h = single_mode(16, L, (1, 0), 0.5)
    with pytest.raises(TubularViolation):
        relaxational_step_imex(SimState(0.0, h), 1e-3, p)
    with pytest.raises(TubularViolation):
        picard_step(SimState(0.0, h), 1e-3, p)


def test_step_halving_then_give_up():
    p = MaterialParams(gamma=1.0)
    h = single_mode(16, L, (1, 0), 0.5)
    # a remainder that pushes every mode far outside the neighbourhood, whatever the step
    with pytest.raises(TubularViolation):
        relaxational_step_imex(SimState(0.0, h), 1e-3, p, remainder=lambda g: -1e9 * np.cos(np.arange(16))[:, None] * np.ones((16, 16)))


def test_diagnostics_flat():
    row = diagnostics_record(SimState(0.0, HeightField.zeros(16, L)), MaterialParams())
    assert row.F == 0 and row.D == 0 and row.tail_fraction == 0
    assert row.area == pytest.approx(L * L)
    assert len(row.as_tuple()) == len(DIAGNOSTIC_COLUMNS)


def test_dissipation_matches_energy_loss():
    p = MaterialParams()
    h0 = single_mode(32, L, (2, 1), 1e-4)
    dt = 1e-4
    _, diags = simulate(h0, p, "linear", dt, 20 * dt)
    F, D = diags.column("F"), diags.column("D")
    dF = (F[2:] - F[:-2]) / (2 * dt)
    assert np.max(np.abs(-dF - D[1:-1]) / D[1:-1]) < 1e-3


def test_tail_fraction_and_warning(caplog):
    n = 16
    c = np.zeros((n, n), complex)
    c[7, 0] = c[-7, 0] = 0.01
    h = HeightField.from_coefficients(c, L)
    assert tail_fraction(h) == pytest.approx(1.0)
    assert tail_fraction(single_mode(n, L, (1, 0), 0.1)) < 1e-30
    diags = SimDiagnostics()
    with caplog.at_level(logging.WARNING):
        diags.append(diagnostics_record(SimState(0.0, h), MaterialParams()))
    assert "under-resolved" in caplog.text


def test_equilibrium_check():
    p = MaterialParams()
    ok, res = equilibrium_check(HeightField.zeros(16, L), p, 1e-12)
    assert ok and res == 0
    eps = 1e-6
    ok, res = equilibrium_check(single_mode(16, L, (2, 0), eps), p, 1e-8)
    assert not ok and res == pytest.approx(16 * eps, rel=1e-4)
    h0 = random_smooth(16, L, seed=10, amplitude=0.05, max_mode=2)
    state, _ = simulate(h0, p, "imex", 0.5, 150.0, cadence=1000)
    ok, res = equilibrium_check(state, p, 1e-8 * p.kappa / L**3)
    assert ok, res


def test_simulate_records():
    p = MaterialParams()
    h0 = single_mode(16, L, (1, 1), 0.01)
    seen = []
    state, diags = simulate(h0, p, "imex", 0.01, 0.095, cadence=3, on_record=lambda s, r: seen.append(s.t))
    n = step_count(0.01, 0.095)
    assert n == 10 and len(diags) == int(np.ceil(n / 3)) + 1 == len(seen)
    assert state.t == 0.095 and seen[-1] == 0.095
    with pytest.raises(ValueError):
        simulate(h0, p, "euler", 0.01, 0.1)


def test_dissipation_formula_single_mode():
    p = MaterialParams(C0=0.5)
    h = single_mode(16, L, (1, 0), 0.01)
    a = p.kappa * (1 + p.C0**2 / 2)
    M = 1 / (2 * 1 * 2)
    expected = 2 * M * a * a * abs(fft2(h.values)[1, 0]) ** 2 * L**2
    assert dissipation_estimate(h, p) == pytest.approx(expected, rel=1e-12)
    assert helfrich_energy(graph_geometry(h), p) > 0
