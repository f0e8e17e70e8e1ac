"""Properties of the long one-, two- and three-peak branches (p from 10 to 300)."""
import numpy as np
import pytest

from peaklab import asymptotics as A
from peaklab.phim import check_solver_peaks

from test_solver import certificate


@pytest.fixture(scope="module")
def branches(branch_m1, branch_m2, branch_m3):
    return {1: branch_m1, 2: branch_m2, 3: branch_m3}


def test_schedule_and_peak_count(branches):
    for m, b in branches.items():
        assert len(b) == 37 and b[0].p == 10.0 and b[-1].p == 300.0
        assert b.n_peaks == m
        assert all(len(A.detect_peaks(s)) == m for s in b)


def test_sup_norm(branches):
    for b in branches.values():
        top = np.array([A.linf(s) for s in b])
        assert np.all(np.diff(top) > 0) and np.all(top < 2)
        assert np.all(top[b.p_values >= 50] >= 1 - 1e-3)


def test_symmetric_configurations(branches):
    for m in (2, 3):
        s = branches[m][-1]
        pk = A.detect_peaks(s)
        gaps = np.diff(np.concatenate([pk.angles, [pk.angles[0] + 2 * np.pi]]))
        assert np.max(np.abs(gaps - 2 * np.pi / m)) < 1e-8
        w = [e.a_mass for e in A.weights(s, pk)]
        assert np.ptp(w) < 1e-8


def test_no_vanishing_and_mass(branches):
    for b in branches.values():
        for s in b:
            assert A.no_vanishing_check(s)
            assert abs(s.trace.integrate(lambda v: v ** s.p) / s.gamma() - 1) < 1e-12
            assert A.holder_gap(s) >= 0


def test_residual_certificates(branches):
    for b in branches.values():
        for s in (b[0], b.at(100), b[-1]):
            assert certificate(s) <= 1e-9


def test_weight_formulas_converge(branch_m1):
    gap = [abs(w.a_mass - w.a_energy) for s in branch_m1.records[:13:6]
           for w in A.weights(s, r=0.3)]
    assert gap[0] > gap[1] > gap[2]
    assert max(abs(w.a_mass - w.a_energy) for w in A.weights(branch_m1[-1], r=0.3)) < 1e-10


def test_weak_vanishing(branch_m1):
    recs = [branch_m1[0], branch_m1.at(100), branch_m1[-1]]
    s = A.weak_vanishing_probe(recs, lambda x, y: x ** 2 + y ** 2)
    assert np.all(np.diff(np.abs(s)) < 0)


def test_solver_peaks_balanced(branches):
    for m, b in branches.items():
        rep = check_solver_peaks(b)
        assert rep.passed and rep.residual <= 1e-6 and len(rep.angles) == m


def test_brezis_merle_monotone_in_k(branch_m1):
    s = branch_m1[-1]
    v = [A.brezis_merle_probe(s, k) for k in (0.0, 1.0, 2.0, 3.0)]
    assert np.all(np.diff(v) > 0)
