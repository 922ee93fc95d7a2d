import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vesiflow.errors import BumpSlopeViolation, TubularViolation
from vesiflow.fields import HeightField, TangentField, grid_points, random_smooth, single_mode
from vesiflow.geometry import (
    BUMP_MAX_SLOPE,
    bump,
    bump_derivative,
    graph_geometry,
    grad_f_pointwise,
    hanzawa_jacobian,
    hanzawa_map,
    helfrich_energy,
    helfrich_gradient,
    linearized_A_apply,
    nonlinear_remainder_Q,
    surface_area,
    surface_divergence,
)
from vesiflow.oracle import fd_energy_gradient
from vesiflow.params import MaterialParams

L = 2 * np.pi


def test_flat_geometry():
    g = graph_geometry(HeightField.zeros(16, L))
    assert np.all(g.metric == np.eye(2)[:, :, None, None])
    assert np.all(g.H == 0) and np.all(g.K == 0)
    assert np.all(g.normal[2] == 1) and np.all(g.normal[:2] == 0)


def test_mean_curvature_first_order():
    # with the normal pointing to increasing height, H ~ Lap h; a crest (concave) has H < 0
    eps, k = 1e-6, 3
    h = single_mode(32, L, (k, 0), eps)
    g = graph_geometry(h)
    x1, _ = grid_points(32, L)
    assert np.max(np.abs(g.H - (-eps * k**2 * np.cos(k * x1)))) < 1e-15
    assert np.max(np.abs(g.K)) < 1e-20
    assert g.H[0, 0] < 0


def test_metric_and_invariants():
    h = random_smooth(32, L, seed=3, amplitude=0.3)
    g = graph_geometry(h)
    h1, h2 = g.grad_h
    assert np.allclose(g.metric[0, 1], h1 * h2)
    assert np.allclose(g.area_element**2, 1 + h1**2 + h2**2)
    W = g.weingarten
    assert np.allclose(W[0, 0] + W[1, 1], g.H, rtol=1e-10, atol=1e-12)
    assert np.allclose(W[0, 0] * W[1, 1] - W[0, 1] * W[1, 0], g.K, rtol=1e-10, atol=1e-12)
    assert np.all(g.H**2 - 4 * g.K >= -1e-12)
    assert np.allclose(np.sum(g.normal**2, axis=0), 1.0)


def test_energy_examples():
    p = MaterialParams(kappa=1.0, C0=0.0)
    assert helfrich_energy(graph_geometry(HeightField.zeros(16, L)), p) == 0.0
    pc = MaterialParams(kappa=1.7, C0=0.4)
    assert helfrich_energy(graph_geometry(HeightField.zeros(16, 3.0)), pc) == pytest.approx(0.5 * 1.7 * 0.16 * 9.0)
    eps, Lx = 1e-4, 3.0
    h = single_mode(32, Lx, (1, 0), eps)
    expected = 0.5 * eps**2 * (2 * np.pi / Lx) ** 4 * Lx**2 / 2
    assert helfrich_energy(graph_geometry(h), p) == pytest.approx(expected, rel=1e-6)


def test_gradient_flat_is_zero():
    for C0 in (0.0, 0.7):
        grad = helfrich_gradient(graph_geometry(HeightField.zeros(16, L)), MaterialParams(C0=C0))
        assert np.all(grad == 0)


def test_grad_f_pointwise_examples():
    R = 1.3
    assert grad_f_pointwise(2 / R, 1 / R**2, 0.0, MaterialParams()) == pytest.approx(0.0, abs=1e-15)
    p = MaterialParams(kappa=1.5, C0=0.3)
    assert grad_f_pointwise(2 / R, 1 / R**2, 0.0, p) == pytest.approx(1.5 * (0.3 / R) * (2 / R - 0.3), rel=1e-14)
    assert grad_f_pointwise(0.0, 0.0, 1.0, MaterialParams(kappa=2.0)) == 2.0


def test_linearized_A_examples():
    h = single_mode(16, L, (2, 1), 1.0)
    k4 = 5.0**2
    out = linearized_A_apply(h, MaterialParams(kappa=1.3))
    assert np.allclose(out.values, 1.3 * k4 * h.values)
    out = linearized_A_apply(h, MaterialParams(kappa=1.3, C0=0.8))
    assert np.allclose(out.values, 1.3 * (k4 + 0.32 * 5.0) * h.values)
    const = HeightField(np.full((16, 16), 0.2), L)
    assert np.all(linearized_A_apply(const, MaterialParams()).values == 0)


def test_linearization_consistency():
    p = MaterialParams(C0=0.5)
    h0 = random_smooth(32, L, seed=4, amplitude=1.0, max_mode=5)
    sizes = []
    for eps in (1e-2, 1e-3, 1e-4):
        sizes.append(np.max(np.abs(nonlinear_remainder_Q(eps * h0, p))))
    order = np.polyfit(np.log([1e-2, 1e-3, 1e-4]), np.log(sizes), 1)[0]
    assert order >= 1.9
    assert np.all(nonlinear_remainder_Q(HeightField.zeros(16, L), p) == 0)


def test_remainder_guard():
    h = single_mode(16, L, (1, 0), 1.0)
    with pytest.raises(TubularViolation):
        nonlinear_remainder_Q(h, MaterialParams(gamma=1.0))


@pytest.mark.parametrize("seed", [0, 1])
def test_fd_gradient_slope(seed):
    p = MaterialParams(kappa=1.2, C0=0.3)
    # N = 64 keeps the spatial discretisation floor below the O(eps^2) residuals
    h = random_smooth(64, L, seed=seed, amplitude=0.2, max_mode=4)
    dh = random_smooth(64, L, seed=seed + 10, amplitude=1.0, max_mode=4)
    rep = fd_energy_gradient(h, dh, [1e-2, 5e-3, 2.5e-3, 1e-3], p)
    assert rep.slope >= 1.9


def test_translation_equivariance():
    p = MaterialParams(C0=0.2)
    h = random_smooth(16, L, seed=7, amplitude=0.2)
    hs = h.shifted(3, 5)
    g, gs = graph_geometry(h), graph_geometry(hs)
    assert helfrich_energy(gs, p) == pytest.approx(helfrich_energy(g, p), rel=1e-12)
    assert np.allclose(np.roll(helfrich_gradient(g, p), (3, 5), axis=(0, 1)), helfrich_gradient(gs, p), atol=1e-12)


def test_surface_divergence_examples():
    flat = graph_geometry(HeightField.zeros(16, L))
    w = np.random.default_rng(0).standard_normal((16, 16))
    assert np.all(surface_divergence(TangentField(np.zeros((2, 16, 16)), L), w, flat) == 0)
    f = single_mode(16, L, (2, 0), 1.0)
    v = TangentField(f.grid.gradient_values(f.values), L)
    assert np.allclose(surface_divergence(v, 0.0, flat), -4.0 * f.values, atol=1e-12)
    curved = graph_geometry(random_smooth(16, L, seed=2, amplitude=0.2))
    out = surface_divergence(TangentField(np.zeros((2, 16, 16)), L), np.ones((16, 16)), curved)
    assert np.allclose(out, -curved.H)


def test_surface_area_flat():
    assert surface_area(graph_geometry(HeightField.zeros(8, 3.0))) == pytest.approx(9.0)


def test_bump_profile():
    s = np.linspace(-1.5, 1.5, 3001)
    b = bump(s)
    assert np.all(b[np.abs(s) <= 0.25] == 1.0)
    assert np.all(b[np.abs(s) >= 0.75] == 0.0)
    assert np.max(np.abs(bump_derivative(s))) <= BUMP_MAX_SLOPE + 1e-12
    # derivative matches finite differences
    fd = np.gradient(b, s)
    assert np.max(np.abs(fd - bump_derivative(s))) < 1e-3


def test_hanzawa_map():
    p = MaterialParams(gamma=1.0)
    h = random_smooth(16, L, seed=1, amplitude=0.2)
    x = np.array([[0.3, 1.1], [2.0, 4.0]])
    on_graph = hanzawa_map(h, x, 0.0, p)
    assert np.allclose(on_graph[:, :2], x)
    from vesiflow.geometry import evaluate_at

    assert np.allclose(on_graph[:, 2], evaluate_at(h, x))
    far = hanzawa_map(h, x, 0.9, p)
    assert np.allclose(far[:, 2], 0.9)
    zero = hanzawa_map(HeightField.zeros(16, L), x, 0.4, p)
    assert np.allclose(zero[:, 2], 0.4)
    # Jacobian against a finite difference in y
    y, d = 0.45, 1e-6
    fd = (hanzawa_map(h, x, y + d, p)[:, 2] - hanzawa_map(h, x, y - d, p)[:, 2]) / (2 * d)
    assert np.allclose(fd, hanzawa_jacobian(h, x, y, p), atol=1e-7)
    assert np.all(hanzawa_jacobian(h, x, np.linspace(-1, 1, 2)[:, None], p) > 0)


def test_hanzawa_guards():
    h = single_mode(16, L, (1, 0), 0.3)
    with pytest.raises(BumpSlopeViolation):
        hanzawa_map(h, np.zeros(2), 0.0, MaterialParams(gamma=1.0))
    with pytest.raises(TubularViolation):
        hanzawa_map(h, np.zeros(2), 0.0, MaterialParams(gamma=0.3))


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 1000))
def test_energy_nonnegative(seed):
    h = random_smooth(16, L, seed=seed, amplitude=0.3)
    assert helfrich_energy(graph_geometry(h), MaterialParams(C0=0.4)) >= 0
