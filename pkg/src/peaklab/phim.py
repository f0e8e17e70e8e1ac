"""Interaction energy of m boundary points and its critical points.

    phi_m(x_1..x_m) = -[ sum_i H(x_i, x_i) + sum_{j != i} G(x_i, x_j) ]

On the disk the Robin function is constant and its tangential derivative
vanishes, so only the pair terms G_b(theta_i - theta_j) move.  With weights
the balance condition at x_i reads

    R_i = a_i d_tau H(x_i, x_i) + sum_{l != i} a_l d_tau G(x_i, x_l) = 0.

Sign convention: for the weighted energy
Psi = sum_i a_i^2 H(x_i, x_i) + sum_{j != i} a_i a_j G(x_i, x_j)
we have dPsi/dtheta_i = 2 a_i R_i, and for unit weights
dphi_m/dtheta_i = -2 R_i.
"""
from dataclasses import dataclass

import numpy as np

from .errors import CoincidentPoints, CollapseDetected, MaxIterations
from .geometry import TWO_PI, arc_distance
from .greenkernel import kernel

MIN_DISTANCE = 1e-6
TOL = 1e-10
MAX_ITER = 100_000


def _angles(angles):
    a = np.atleast_1d(np.asarray(angles, dtype=float))
    if a.ndim != 1 or a.size < 1:
        raise ValueError("need a 1-d array of angles")
    if a.size > 1:
        d = arc_distance(a[:, None], a[None, :])
        d[np.diag_indices(a.size)] = np.inf
        if np.min(d) < MIN_DISTANCE:
            raise CoincidentPoints(f"two points closer than {MIN_DISTANCE:g} rad")
    return a


def _weights(w, m):
    if w is None:
        return np.ones(m)
    w = np.atleast_1d(np.asarray(w, dtype=float))
    if w.shape != (m,) or np.any(w <= 0):
        raise ValueError("weights must be m positive numbers")
    return w


def _pair_differences(a):
    d = a[:, None] - a[None, :]
    off = ~np.eye(a.size, dtype=bool)
    return d, off


def phi_m(angles, kern=None):
    """phi_m at the given boundary angles (unweighted)."""
    kern = kernel() if kern is None else kern
    a = _angles(getattr(angles, "angles", angles))
    d, off = _pair_differences(a)
    pair = kern.boundary(d[off]).sum() if a.size > 1 else 0.0
    return -(a.size * kern.robin + pair)


def weighted_energy(angles, weights=None, kern=None):
    """Psi = sum a_i^2 H(x_i, x_i) + sum_{j != i} a_i a_j G(x_i, x_j)."""
    kern = kernel() if kern is None else kern
    a = _angles(angles)
    w = _weights(weights, a.size)
    d, off = _pair_differences(a)
    pair = (np.outer(w, w)[off] * kern.boundary(d[off])).sum() if a.size > 1 else 0.0
    return float(np.sum(w ** 2) * kern.robin + pair)


def balance_vector(angles, weights=None, kern=None):
    """R_i for every point (the robin term contributes nothing on the disk)."""
    kern = kernel() if kern is None else kern
    a = _angles(angles)
    w = _weights(weights, a.size)
    if a.size == 1:
        return np.zeros(1)
    d, off = _pair_differences(a)
    g = np.zeros_like(d)
    g[off] = kern.boundary_derivative(d[off])
    return g @ w


def balance_residual(angles, weights=None, kern=None):
    cfg = angles if isinstance(angles, PeakConfiguration) else None
    if cfg is not None:
        angles, weights = cfg.angles, cfg.weights
    return float(np.max(np.abs(balance_vector(angles, weights, kern))))


@dataclass(frozen=True)
class PeakConfiguration:
    angles: np.ndarray
    weights: np.ndarray
    phi_value: float
    residual: float

    @classmethod
    def at(cls, angles, weights=None):
        a = _angles(angles)
        w = _weights(weights, a.size)
        return cls(a.copy(), w.copy(), float(phi_m(a)), balance_residual(a, w))

    @property
    def m(self):
        return self.angles.size

    def separations(self):
        s = np.sort(np.mod(self.angles, TWO_PI))
        return np.diff(np.concatenate([s, [s[0] + TWO_PI]]))


@dataclass
class CriticalSearch:
    config: PeakConfiguration
    iterations: int
    trajectory: list


def find_critical(config0, step=0.5, tol=TOL, max_iter=MAX_ITER, weights=None, record=True):
    """Projected gradient ascent of phi_m on the torus of angles.

    The first angle is held fixed (rotations are a symmetry), steps start at `step`, are halved
    until phi_m increases (or, once phi_m is flat to rounding, until the
    residual drops) and grown again after each accepted step.  Stops
    when the balance residual drops below tol.
    """
    a = np.array(_angles(getattr(config0, "angles", config0)), dtype=float)
    if weights is None and isinstance(config0, PeakConfiguration):
        weights = config0.weights
    kern = kernel()
    traj = []

    def state(x):
        return phi_m(x, kern), balance_vector(x, None, kern)

    phi, R = state(a)
    h = float(step)
    for it in range(int(max_iter) + 1):
        res = float(np.max(np.abs(R)))
        if record:
            traj.append((it, a.copy(), phi, res))
        if res <= tol:
            a = np.mod(a, TWO_PI)
            cfg = PeakConfiguration(a, _weights(weights, a.size), float(phi),
                                    balance_residual(a, weights, kern))
            return CriticalSearch(cfg, it, traj)
        if it == max_iter:
            break
        grad = -2.0 * R
        grad[0] = 0.0
        while True:
            trial = a + h * grad
            try:
                _angles(trial)
            except CoincidentPoints:
                raise CollapseDetected("two angles collided during the search")
            pt, Rt = state(trial)
            # near the critical point phi changes below rounding; fall back to
            # the residual there
            flat = pt >= phi - 8 * np.finfo(float).eps * abs(phi)
            if pt > phi or (flat and np.max(np.abs(Rt)) < res) or h < 1e-300:
                break
            h *= 0.5
        if h < 1e-300:
            raise MaxIterations("step size underflow in the critical-point search")
        a, phi, R = trial, pt, Rt
        h *= 2.0
    raise MaxIterations(f"no critical point within {max_iter} iterations (residual {res:.3e})")


def equispaced(m, start=0.0):
    return start + TWO_PI * np.arange(m) / m


def perturbed(m, amplitude=0.1, seed=0):
    """Equispaced angles with a uniform perturbation of the given size (first kept)."""
    rng = np.random.default_rng(seed)
    a = equispaced(m)
    a[1:] += rng.uniform(-amplitude, amplitude, m - 1)
    return a


@dataclass(frozen=True)
class SolverPeakReport:
    p: float
    angles: np.ndarray
    weights: np.ndarray
    residual: float
    symmetric: bool
    threshold: float = 1e-6

    @property
    def passed(self):
        return (not self.symmetric) or self.residual <= self.threshold


def check_solver_peaks(branch, r=0.3):
    """Balance residual of the peaks of the final record, weighted by a_mass."""
    from .asymptotics import detect_peaks, weights as peak_weights
    sol = branch[-1]
    peaks = detect_peaks(sol)
    if not len(peaks):
        raise ValueError("final record has no peaks")
    w = np.array([e.a_mass for e in peak_weights(sol, peaks, r)]) if len(peaks) > 1 else np.ones(1)
    res = balance_residual(peaks.angles, w)
    return SolverPeakReport(sol.p, peaks.angles, w, res, symmetric=len(peaks) == branch.m)
