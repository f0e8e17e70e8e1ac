import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from peaklab.errors import OutOfChart
from peaklab.geometry import (DiskBoundaryPoint, arc_ball, arc_distance, boundary_point,
                              canonical_angle, chart_at, chord, rho, rho_prime, rho_second)

angles = st.floats(-20.0, 20.0, allow_nan=False)


def test_boundary_point_examples():
    assert np.allclose(boundary_point(0.0), [1.0, 0.0], atol=1e-16)
    assert np.allclose(boundary_point(np.pi / 2), [0.0, 1.0], atol=1e-16)
    assert DiskBoundaryPoint(2 * np.pi).theta == 0.0
    assert np.allclose(DiskBoundaryPoint(2 * np.pi).xy, [1.0, 0.0])


def test_canonical_angle_range():
    t = canonical_angle(np.array([-1e-17, 0.0, 2 * np.pi, 7.0, -7.0]))
    assert np.all((t >= 0) & (t < 2 * np.pi))


def test_chart_rho_examples():
    c = chart_at(0.0)
    assert c.rho(0.0) == 0.0
    assert abs(c.rho(0.6) - 0.2) < 1e-15
    assert rho_prime(0.0) == 0.0
    with pytest.raises(OutOfChart):
        c.rho(0.95)


def test_rho_curvature_fd():
    h = 1e-4
    fd = (rho(h) - 2 * rho(0.0) + rho(-h)) / h ** 2
    assert abs(fd - 1.0) < 1e-8
    assert rho_second(0.0) == 1.0


def test_psi_roundtrip(rng):
    for theta0 in rng.uniform(0, 2 * np.pi, 5):
        c = chart_at(theta0)
        # points of the closed disk near the base point
        r = rng.uniform(0.2, 1.0, 100)
        a = theta0 + rng.uniform(-0.8, 0.8, 100)
        x = np.stack([r * np.cos(a), r * np.sin(a)], axis=1)
        xl = c.to_local(x)
        x = x[np.abs(xl[:, 0]) < 0.9]
        assert np.max(np.abs(c.psi_inverse(c.psi(x)) - x)) < 1e-12


def test_boundary_maps_to_y2_zero(rng):
    c = chart_at(1.3)
    th = 1.3 + rng.uniform(-1.0, 1.0, 200)
    y = c.psi(boundary_point(th))
    assert np.max(np.abs(y[:, 1])) < 1e-14


def test_chart_rotation_equivariance(rng):
    y = np.stack([rng.uniform(-0.8, 0.8, 50), rng.uniform(0, 0.5, 50)], axis=1)
    for t0 in (0.7, 2.0, 5.5):
        R = np.array([[np.cos(t0), -np.sin(t0)], [np.sin(t0), np.cos(t0)]])
        assert np.max(np.abs(chart_at(t0).psi_inverse(y) - chart_at(0.0).psi_inverse(y) @ R.T)) < 1e-12


def test_arc_ball_examples():
    lo, hi = arc_ball(DiskBoundaryPoint(0.0), np.sqrt(2.0))
    assert abs(hi - np.pi / 2) < 1e-15 and abs(lo + np.pi / 2) < 1e-15
    lo, hi = arc_ball(DiskBoundaryPoint(np.pi), 0.1)
    assert abs(0.5 * (lo + hi) - np.pi) < 1e-15
    assert abs(0.5 * (hi - lo) - 2 * np.arcsin(0.05)) < 1e-15
    lo, hi = arc_ball(0.0, 2.0 - 1e-12)
    assert hi - lo > 2 * np.pi - 1e-5
    with pytest.raises(ValueError):
        arc_ball(0.0, 2.0)


def test_arc_ball_membership(rng):
    lo, hi = arc_ball(0.4, 0.7)
    th = rng.uniform(0, 2 * np.pi, 2000)
    inside = chord(th, 0.4) < 0.7
    assert np.array_equal(inside, arc_distance(th, 0.4) < 0.5 * (hi - lo))


@given(angles, angles)
@settings(max_examples=200)
def test_chord_arc_consistency(t1, t2):
    d = np.linalg.norm(boundary_point(t1) - boundary_point(t2))
    assert abs(d - chord(t1, t2)) < 1e-14
    assert 0.0 <= arc_distance(t1, t2) <= np.pi + 1e-15
