"""Unit-disk geometry: boundary points, chord/arc distances and the local
boundary-graph chart used for blow-up rescaling.

The chart at a boundary angle ``theta0`` lives in a rotated frame where the
base point sits at the origin, the outward normal is ``-e2`` and the disk
is the set ``{x2 > rho(x1)}`` near the origin with
``rho(x1) = 1 - sqrt(1 - x1**2)``.  Global coordinates are recovered from
``X = (1 - x2) n + x1 tau`` with ``n`` the outward normal and ``tau`` the
counter-clockwise tangent at the base point.
"""
from dataclasses import dataclass

import numpy as np

from .errors import OutOfChart

TWO_PI = 2.0 * np.pi
VALIDITY_RADIUS = 0.9


def canonical_angle(theta):
    """Map angles to [0, 2*pi); 2*pi itself maps to 0."""
    t = np.mod(theta, TWO_PI)
    t = np.where(t >= TWO_PI, 0.0, t)
    if np.ndim(t) == 0:
        return float(t)
    return t


def wrap_angle(theta):
    """Map angles to (-pi, pi]."""
    t = np.pi - np.mod(np.pi - np.asarray(theta, dtype=float), TWO_PI)
    if np.ndim(t) == 0:
        return float(t)
    return t


@dataclass(frozen=True)
class DiskBoundaryPoint:
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", canonical_angle(float(self.theta)))

    @property
    def xy(self):
        return boundary_point(self.theta)

    @property
    def normal(self):
        return boundary_point(self.theta)

    @property
    def tangent(self):
        return np.array([-np.sin(self.theta), np.cos(self.theta)])

    def rotated(self, angle):
        return DiskBoundaryPoint(self.theta + angle)


def boundary_point(theta):
    """(cos theta, sin theta); on the unit circle this is also the outward normal."""
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def chord(theta1, theta2):
    """Euclidean distance between two boundary points, 2|sin((t1 - t2)/2)|."""
    return 2.0 * np.abs(np.sin(0.5 * (np.asarray(theta1) - np.asarray(theta2))))


def arc_distance(theta1, theta2):
    return np.abs(wrap_angle(np.asarray(theta1, dtype=float) - np.asarray(theta2, dtype=float)))


def rho(x1):
    # 1 - sqrt(1 - x^2) without cancellation
    x1 = np.asarray(x1, dtype=float)
    return x1 * x1 / (1.0 + np.sqrt(1.0 - x1 * x1))


def rho_prime(x1):
    x1 = np.asarray(x1, dtype=float)
    return x1 / np.sqrt(1.0 - x1 * x1)


def rho_second(x1):
    x1 = np.asarray(x1, dtype=float)
    return (1.0 - x1 * x1) ** -1.5


@dataclass(frozen=True)
class GraphChart:
    """Boundary-flattening chart ``y = (x1, x2 - rho(x1))`` at a base angle."""

    theta0: float
    validity_radius: float = VALIDITY_RADIUS

    def __post_init__(self):
        object.__setattr__(self, "theta0", canonical_angle(float(self.theta0)))

    @property
    def normal(self):
        return np.array([np.cos(self.theta0), np.sin(self.theta0)])

    @property
    def tangent(self):
        return np.array([-np.sin(self.theta0), np.cos(self.theta0)])

    def rho(self, x1):
        self._check(x1)
        return rho(x1)

    def _check(self, x1):
        if np.any(np.abs(np.asarray(x1)) > self.validity_radius):
            raise OutOfChart(
                f"|x1| exceeds chart validity radius {self.validity_radius}")

    def to_local(self, x):
        """Global point(s) -> rotated-frame coordinates (x1, x2)."""
        x = np.asarray(x, dtype=float)
        d = x - self.normal
        return np.stack([d @ self.tangent, -(d @ self.normal)], axis=-1)

    def to_global(self, xl):
        xl = np.asarray(xl, dtype=float)
        x1 = xl[..., 0:1]
        x2 = xl[..., 1:2]
        return (1.0 - x2) * self.normal + x1 * self.tangent

    def psi(self, x):
        xl = self.to_local(x)
        self._check(xl[..., 0])
        return np.stack([xl[..., 0], xl[..., 1] - rho(xl[..., 0])], axis=-1)

    def psi_inverse(self, y):
        y = np.asarray(y, dtype=float)
        self._check(y[..., 0])
        xl = np.stack([y[..., 0], y[..., 1] + rho(y[..., 0])], axis=-1)
        return self.to_global(xl)

    def local_psi_inverse(self, y):
        """Chart -> rotated-frame coordinates; keeps full precision for tiny y."""
        y = np.asarray(y, dtype=float)
        self._check(y[..., 0])
        return np.stack([y[..., 0], y[..., 1] + rho(y[..., 0])], axis=-1)


def chart_at(theta0):
    return GraphChart(theta0)


def arc_ball(center, r):
    """Angle interval of boundary points within chord distance ``r`` of ``center``.

    Returns ``(lo, hi)`` with ``hi - lo = 4 arcsin(r/2)``; ``lo`` may be
    negative, the interval is understood modulo 2*pi.
    """
    if not 0.0 < r < 2.0:
        raise ValueError("arc_ball radius must lie in (0, 2)")
    theta = center.theta if isinstance(center, DiskBoundaryPoint) else float(center)
    half = 2.0 * np.arcsin(0.5 * r)
    return theta - half, theta + half
