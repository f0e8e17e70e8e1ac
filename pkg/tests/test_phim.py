import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from peaklab.errors import CoincidentPoints, CollapseDetected, MaxIterations
from peaklab.greenkernel import kernel
from peaklab.phim import (PeakConfiguration, balance_residual, balance_vector, equispaced,
                          find_critical, perturbed, phi_m, weighted_energy)

configs = st.integers(2, 6).flatmap(
    lambda m: st.lists(st.floats(0, 2 * np.pi), min_size=m, max_size=m))


def spread(a):
    a = np.sort(np.mod(a, 2 * np.pi))
    return np.min(np.diff(np.concatenate([a, [a[0] + 2 * np.pi]]))) if a.size > 1 else 2 * np.pi


def test_phi_examples():
    assert phi_m([0.7]) == -kernel().robin
    vals = {s: phi_m([0.0, s]) for s in (np.pi / 4, np.pi / 2, 3 * np.pi / 4, np.pi)}
    assert max(vals, key=vals.get) == np.pi
    assert balance_residual(equispaced(3)) <= 1e-10
    assert balance_residual([0.0, 0.9 * np.pi]) > 1e-3
    with pytest.raises(CoincidentPoints):
        phi_m([0.0, 1e-8])


def test_configuration():
    c = PeakConfiguration.at([0.0, 2.0, 4.0])
    assert c.m == 3 and np.all(c.weights == 1)
    assert c.residual == balance_residual(c.angles, c.weights)
    assert c.phi_value == phi_m(c.angles)
    with pytest.raises(ValueError):
        PeakConfiguration.at([0.0, 1.0], weights=[1.0, -1.0])


@pytest.mark.parametrize("m", [2, 3, 4, 5])
@pytest.mark.parametrize("seed", [0, 1])
def test_find_critical_equispaced(m, seed):
    res = find_critical(perturbed(m, 0.1, seed))
    assert res.config.residual <= 1e-10
    assert np.max(np.abs(res.config.separations() - 2 * np.pi / m)) < 1e-7
    it, a, phi, r = res.trajectory[-1]
    assert it == res.iterations and r <= 1e-10
    # ascent: phi never decreases beyond rounding
    phis = np.array([t[2] for t in res.trajectory])
    assert np.all(np.diff(phis) >= -1e-14)


def test_find_critical_two_points():
    res = find_critical([0.0, 2.0])
    assert abs(res.config.separations()[0] - np.pi) < 1e-8
    assert res.config.angles[0] == 0.0


def test_find_critical_errors():
    with pytest.raises(MaxIterations):
        find_critical(perturbed(3, 0.3), max_iter=3)
    with pytest.raises(CoincidentPoints):
        find_critical([1.0, 1.0])
    # a huge fixed step pushes points through each other on the first move
    with pytest.raises((CollapseDetected, MaxIterations)):
        find_critical([0.0, 1e-5, 3.0], step=1e6, max_iter=5)


def _fd_grad(f, a, h=1e-6):
    return np.array([(f(a + h * e) - f(a - h * e)) / (2 * h) for e in np.eye(a.size)])


def test_gradient_fd_random(rng):
    n = 0
    while n < 20:
        m = rng.integers(2, 6)
        a = rng.uniform(0, 2 * np.pi, m)
        if spread(a) < 0.05:
            continue
        n += 1
        g = _fd_grad(phi_m, a)
        R = balance_vector(a)
        assert np.max(np.abs(g + 2 * R)) <= 1e-5 * max(1.0, np.max(np.abs(g)))
        w = rng.uniform(0.5, 2.0, m)
        gw = _fd_grad(lambda x: weighted_energy(x, w), a)
        assert np.max(np.abs(gw - 2 * w * balance_vector(a, w))) <= 1e-5 * max(1.0, np.max(np.abs(gw)))


@given(configs, st.floats(-10, 10))
@settings(max_examples=60, deadline=None)
def test_rotation_and_permutation(a, rot):
    a = np.array(a)
    if spread(a) < 1e-3:
        return
    assert abs(phi_m(a + rot) - phi_m(a)) <= 1e-12 * max(1.0, abs(phi_m(a)))
    perm = a[::-1].copy()
    assert abs(phi_m(perm) - phi_m(a)) <= 1e-14 * max(1.0, abs(phi_m(a))) * a.size
    assert abs(balance_residual(a + rot) - balance_residual(a)) <= 1e-10
