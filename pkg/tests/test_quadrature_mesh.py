import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from peaklab.solver import BoundaryMesh, BoundaryTrace, UniformGrid, panel_interpolate
from peaklab.solver.mesh import MIN_PANEL, Grading, half_edges
from peaklab.solver.quadrature import abs_weights, gauss_legendre, lagrange_matrix, log_weights
from peaklab.solver.nystrom import reduced_operator


@pytest.mark.parametrize("a", [-3.0, -1.0, -0.37, 0.0, 0.5, 1.0, 1.2, 2.9])
def test_log_weights_exact_for_polynomials(a):
    q = 16
    x, _ = gauss_legendre(q)
    v = log_weights(np.array([a]), q)[0]
    for deg in (0, 3, 9, 15):
        ref = mp.quad(lambda t: mp.log(abs(a - t)) * t ** deg, [-1, a, 1] if -1 < a < 1 else [-1, 1])
        assert abs(v @ x ** deg - float(ref)) < 1e-13 * max(1.0, abs(float(ref)))


@pytest.mark.parametrize("a", [-0.8, 0.0, 0.3, 1.5])
def test_abs_weights_exact(a):
    q = 16
    x, _ = gauss_legendre(q)
    v = abs_weights(np.array([a]), q)[0]
    for deg in (0, 2, 7, 15):
        ref = mp.quad(lambda t: abs(a - t) * t ** deg, [-1, a, 1] if -1 < a < 1 else [-1, 1])
        assert abs(v @ x ** deg - float(ref)) < 1e-14 * max(1.0, abs(float(ref)))


def test_lagrange_matrix_reproduces_polynomials(rng):
    x, _ = gauss_legendre(16)
    t = rng.uniform(-1, 1, 20)
    M = lagrange_matrix(16, np.concatenate([t, x[:3]]))
    for deg in (0, 5, 15):
        assert np.max(np.abs(M @ x ** deg - np.concatenate([t, x[:3]]) ** deg)) < 1e-13


@pytest.mark.parametrize("m", [1, 2, 3, 5])
@pytest.mark.parametrize("mu", [1e-2, 1e-12, 1e-60])
def test_mesh_invariants(m, mu):
    mesh = BoundaryMesh.graded(m, mu)
    assert np.all(mesh.weights > 0)
    assert abs(mesh.weights.sum() - 2 * np.pi) < 1e-12
    e = mesh.edges
    assert e[0] == 0.0 and abs(e[-1] - np.pi / m) < 1e-15
    assert np.all(np.diff(e) >= MIN_PANEL)
    assert np.diff(e)[0] <= mu / 10 * (1 + 1e-12)
    # panel count grows like log(1/mu)
    assert mesh.n_panels < 2 * m * (np.log(10 / mu) / np.log(3) + 30)


def test_mesh_roundtrip():
    mesh = BoundaryMesh.graded(3, 1e-9, q=12, ratio=4.0)
    back = BoundaryMesh.from_dict(mesh.to_dict())
    assert np.array_equal(back.edges, mesh.edges) and back.q == 12 and back.grading.ratio == 4.0
    g = UniformGrid(48, 3)
    assert UniformGrid.from_dict(g.to_dict()).n == 48
    with pytest.raises(ValueError):
        UniformGrid(50, 3)
    with pytest.raises(ValueError):
        BoundaryMesh(1, np.array([0.0, 1.0]))


def test_refined_mesh():
    mesh = BoundaryMesh.graded(2, 1e-5)
    r = mesh.refined()
    assert r.n_panels == 2 * mesh.n_panels
    assert abs(r.weights.sum() - 2 * np.pi) < 1e-12


def test_expand_symmetry():
    mesh = BoundaryMesh.graded(3, 1e-4)
    f = np.cos(mesh.fund_offsets) + mesh.fund_offsets
    full = mesh.expand(f)
    # D_3 symmetric function of the absolute angle
    g = lambda th: np.cos(np.abs((th + np.pi / 3) % (2 * np.pi / 3) - np.pi / 3)) + \
        np.abs((th + np.pi / 3) % (2 * np.pi / 3) - np.pi / 3)
    assert np.max(np.abs(full - g(mesh.theta))) < 1e-12


def test_panel_interpolation(rng):
    mesh = BoundaryMesh.uniform(1)
    f = lambda t: np.exp(np.cos(t))
    th = rng.uniform(0, 2 * np.pi, 50)
    assert np.max(np.abs(panel_interpolate(mesh, f(mesh.fund_offsets), th) - f(th))) < 1e-12


def test_assembly_deterministic():
    mesh = BoundaryMesh.graded(1, 1e-6)
    A = reduced_operator(mesh)
    B = reduced_operator(BoundaryMesh.from_dict(mesh.to_dict()))
    assert np.max(np.abs(A - B)) <= 1e-13 * np.max(np.abs(A))


def test_trace_validation():
    mesh = BoundaryMesh.uniform(1)
    with pytest.raises(ValueError):
        BoundaryTrace(np.ones(3), mesh)
    t = BoundaryTrace(np.ones(mesh.n_fund), mesh)
    with pytest.raises(ValueError):
        t.values[0] = 2.0
    assert abs(t.integrate() - 2 * np.pi) < 1e-13


@given(st.floats(1e-200, 1e-1), st.floats(1.5, 6.0))
@settings(max_examples=40, deadline=None)
def test_half_edges_partition(h_min, ratio):
    e = half_edges(2, Grading(ratio, h_min))
    assert e[0] == 0 and e[-1] == np.pi / 2 and np.all(np.diff(e) > 0)
