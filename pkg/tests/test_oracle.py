import numpy as np
import pytest

from vesiflow.errors import ShiftError, StabilityError, ZeroModeError
from vesiflow.evolution import SimState, linear_step
from vesiflow.fields import HeightField, random_smooth, single_mode
from vesiflow.oracle import (
    BVPConfig,
    dense_evolution_oracle,
    fd_energy_gradient,
    ode_transmission_oracle,
    solve_transmission_bvp,
)
from vesiflow.params import MaterialParams
from vesiflow.symbols import ModeData, relaxation_rate

W_JUMP = 1.0 / (2.0 * np.sqrt(2.0) * (np.sqrt(2.0) + 1.0))


def _normal_trace(m):
    p = MaterialParams(mu_b=1.0, eta=1.0)
    mode = ModeData.from_params(np.array([1.0, 0.0]), p)
    return ode_transmission_oracle(mode, np.zeros(2), 1.0, BVPConfig(m=m), p).w_trace


def test_normal_trace_example():
    assert abs(_normal_trace(2000) - W_JUMP) < 1e-5


def test_second_order_refinement():
    e1 = abs(_normal_trace(1000) - W_JUMP)
    e2 = abs(_normal_trace(2000) - W_JUMP)
    assert 3.5 < e1 / e2 < 4.5


def test_zero_data_zero_solution():
    p = MaterialParams(eta=0.5)
    bvp = solve_transmission_bvp(ModeData.from_params(np.array([0.3, 1.0]), p), np.zeros(2), 0.0, BVPConfig(m=200), p)
    for side in "+-":
        assert np.all(bvp.v[side] == 0) and np.all(bvp.w[side] == 0) and np.all(bvp.pi[side] == 0)
    assert bvp.q == 0


def test_velocity_continuity_and_pressure_jump():
    p = MaterialParams(mu_b=1.5, mu=0.3, eta=0.4)
    mode = ModeData.from_params(np.array([1.0, 1.0]), p)
    bvp = solve_transmission_bvp(mode, np.array([0.2, -0.5j]), 0.7, BVPConfig(m=500), p)
    assert np.allclose(bvp.v["+"][:, 0], bvp.v["-"][:, 0])
    assert bvp.w["+"][0] == pytest.approx(bvp.w["-"][0])
    assert abs(np.vdot([1j, 1j], bvp.v["+"][:, 0].conj())) < 1e-12


def test_oracle_guards():
    p = MaterialParams(eta=1.0)
    with pytest.raises(ZeroModeError):
        solve_transmission_bvp(ModeData.from_params(np.zeros(2), p), np.zeros(2), 1.0, BVPConfig(m=10), p)
    p0 = MaterialParams(eta=0.0)
    with pytest.raises(ShiftError):
        solve_transmission_bvp(ModeData.from_params(np.ones(2), p0), np.zeros(2), 1.0, BVPConfig(m=10), p0)
    with pytest.raises(ValueError):
        BVPConfig(m=2)


def test_fd_gradient_at_flat_minimum():
    h = HeightField.zeros(16, 2 * np.pi)
    dh = random_smooth(16, 2 * np.pi, seed=1, max_mode=3)
    rep = fd_energy_gradient(h, dh, [1e-2, 1e-3], MaterialParams())
    assert rep.predicted == 0.0
    assert np.all(rep.residuals < 1e-13)


def test_fd_gradient_roundoff_plateau_excluded():
    h = random_smooth(64, 2 * np.pi, seed=3, amplitude=0.2, max_mode=4)
    dh = random_smooth(64, 2 * np.pi, seed=4, max_mode=4)
    rep = fd_energy_gradient(h, dh, [1e-2, 5e-3, 2.5e-3, 1e-12], MaterialParams(C0=0.2))
    assert not rep.used[-1] and np.all(rep.used[:-1])
    assert rep.slope >= 1.9
    assert any("plateau" in n for n in rep.notes)


def test_fd_gradient_amplitude_guard():
    h = single_mode(16, 1.0, (1, 0), 0.9)
    with pytest.raises(ValueError):
        fd_energy_gradient(h, h, [0.2], MaterialParams(gamma=1.0))


def test_rk4_single_mode_decay():
    p = MaterialParams(mu_b=1.2, kappa=0.8)
    h0 = single_mode(16, 2 * np.pi, (2, 1), 1e-3)
    s = float(relaxation_rate(np.array([np.sqrt(5.0)]), p)[0])
    traj = dense_evolution_oracle(h0, 1.0 / s, 1000, p)
    exact = h0.values * np.exp(-1.0)
    assert np.max(np.abs(traj.values[-1] - exact)) <= 1e-10
    # agrees with the exact exponential integrator
    lin = linear_step(SimState(0.0, h0), 1.0 / s, p)
    assert np.max(np.abs(traj.at(1000).values - lin.h.values)) <= 1e-10


def test_rk4_zero_and_stability():
    p = MaterialParams()
    zero = dense_evolution_oracle(HeightField.zeros(16, 2 * np.pi), 1e-3, 5, p)
    assert np.all(zero.values == 0)
    h0 = single_mode(16, 1.0, (4, 0), 1e-3)
    with pytest.raises(StabilityError):
        dense_evolution_oracle(h0, 1.0, 10, p)
