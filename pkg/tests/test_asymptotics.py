import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from peaklab import asymptotics as A
from peaklab.errors import DomainError, OutOfChart, OverlappingBalls
from peaklab.greenkernel import dtn_eigenvalue
from peaklab.solver import BoundaryMesh, BoundaryTrace, make_initial_guess, newton_solve

LAMBDA0 = dtn_eigenvalue(0)


@pytest.fixture(scope="module")
def const5():
    mesh = BoundaryMesh.uniform(1)
    return newton_solve(5.0, BoundaryTrace(np.full(mesh.n_fund, LAMBDA0 ** 0.25), mesh))


@pytest.fixture(scope="module")
def sym(request):
    return {m: newton_solve(10.0, make_initial_guess(m, 10.0)) for m in (2, 3)}


def test_bubble():
    assert A.bubble_u(0, 0) == 0.0
    assert abs(A.bubble_u(0, 2) + np.log(4)) < 1e-15
    assert abs(A.bubble_mass() - 2 * np.pi) < 1e-6
    assert abs(A.bubble_mass(1e-9) - A.bubble_mass()) < 1e-8
    with pytest.raises(DomainError):
        A.bubble_u(0.0, -0.1)


@given(st.floats(-50, 50), st.floats(0, 50))
@settings(max_examples=100)
def test_bubble_harmonic_and_flux(t1, t2):
    h = 1e-3
    lap = (A.bubble_u(t1 + h, t2) + A.bubble_u(t1 - h, t2) + A.bubble_u(t1, t2 + h + 1e-300)
           + A.bubble_u(t1, abs(t2 - h)) - 4 * A.bubble_u(t1, t2)) / h ** 2
    if t2 >= h:
        assert abs(lap) < 1e-4
    # outward normal on t2 = 0 is -e2: -dU/dt2 = e^U
    d = -(A.bubble_u(t1, 1e-6) - A.bubble_u(t1, 0.0)) / 1e-6
    assert abs(d - np.exp(A.bubble_u(t1, 0.0))) < 1e-5


def test_diagnostics_constant(const5):
    c = LAMBDA0 ** 0.25
    d = A.diagnostics(const5)
    assert abs(d.gamma_p - 2 * np.pi * c ** 5) < 1e-12
    assert abs(d.p_energy - 5 * 2 * np.pi * c ** 6) < 1e-12
    assert abs(d.mu_p - 1 / (5 * LAMBDA0)) < 1e-12
    assert d.n_peaks == 0
    assert A.no_vanishing_check(const5)
    assert abs(A.no_vanishing_margin(const5)) < 1e-12
    assert A.holder_gap(const5) > -1e-10


def test_detect_peaks_symmetric(sym):
    for m, s in sym.items():
        pk = A.detect_peaks(s)
        assert len(pk) == m
        gaps = np.diff(np.concatenate([pk.angles, [pk.angles[0] + 2 * np.pi]]))
        assert np.max(np.abs(gaps - 2 * np.pi / m)) < 1e-8
        assert np.all(pk.heights >= 0.5 * A.linf(s))


def test_detect_peaks_trace_only():
    g = make_initial_guess(2, 10.0)
    assert len(A.detect_peaks(g)) == 2
    mesh = BoundaryMesh.uniform(1)
    assert len(A.detect_peaks(BoundaryTrace(np.full(mesh.n_fund, 0.7), mesh))) == 0


def test_weights_symmetric(sym):
    s = sym[2]
    w = A.weights(s, r=0.3)
    assert abs(w[0].a_mass - w[1].a_mass) < 1e-8
    assert sum(e.a_mass for e in w) <= 1 + 1e-10
    for e in w:
        assert e.a_mass > 0 and e.a_energy > 0
        assert abs(e.a_energy ** 2 - 2 * np.pi * e.c1) < 1e-15
    with pytest.raises(OverlappingBalls):
        A.weights(sym[3], r=1.0)


def test_profile_basic(sym):
    s = sym[2]
    prof = A.rescaled_profile(s)
    origin = np.all(prof.grid == 0, axis=1)
    assert np.all(prof.z_values[origin] == 0.0)
    assert np.all(prof.z_values <= 1e-9)
    with pytest.raises(OutOfChart):
        A.rescaled_profile(s, grid=np.array([[1e12, 0.0]]))
    with pytest.raises(DomainError):
        A.rescaled_profile(s, grid=np.array([[0.0, -1.0]]))


def test_far_field_two_peaks_beats_one(sym):
    s = sym[2]
    pk = A.detect_peaks(s)
    w = A.weights(s, pk)
    both = A.far_field_compare(s, w, pk).sup_error
    th = A.far_angles(pk)
    for i in range(2):
        one = A.far_field_compare(s, [w[i]], A.PeakSet((pk[i],)), th).sup_error
        assert both < one
    with pytest.raises(ValueError):
        A.far_field_compare(s, w, pk, test_angles=[pk.angles[0] + 0.1])


def test_brezis_merle_probe_basic(sym):
    s = sym[2]
    assert A.brezis_merle_probe(s, 0) == 2 * np.pi
    vals = [A.brezis_merle_probe(s, k) for k in (0.5, 1.0, 2.5, 3.0)]
    assert np.all(np.diff(vals) > 0)
    with pytest.raises(ValueError):
        A.brezis_merle_probe(s, -1)


def test_unit_mass(sym):
    for s in sym.values():
        assert abs(s.trace.integrate(lambda v: v ** s.p / s.gamma()) - 1) < 1e-12


def test_weak_vanishing(const5):
    from peaklab.solver import continuation
    b = continuation(4.0, 40.0, 2.0, init="constant")
    assert np.all(A.weak_vanishing_probe(b, lambda x, y: np.zeros_like(x)) == 0)
    s = A.weak_vanishing_probe(b, lambda x, y: np.ones_like(x))
    # sqrt(p) 2 pi c int_0^1 I_0(r) r dr / I_0(1) = sqrt(p) 2 pi c I_1(1)/I_0(1)
    ref = [np.sqrt(r.p) * 2 * np.pi * LAMBDA0 ** (1 / (r.p - 1)) * LAMBDA0 for r in b]
    assert np.max(np.abs(s - ref)) < 1e-10
