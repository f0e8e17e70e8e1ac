"""Large-p diagnostics of computed solutions: energies, peak widths, the
rescaled profile against the half-plane bubble, peak weights, far field,
and the no-vanishing and Brezis-Merle probes.

Peak positions are kept as (centre, offset) pairs, the centre being a
sector centre of the mesh, so peaks of width 1e-60 stay resolvable.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from .errors import DomainError, OutOfChart, OverlappingBalls
from .geometry import TWO_PI, VALIDITY_RADIUS, arc_distance, chart_at, chord
from .greenkernel import kernel, steklov_lambda1
from .solver.interior import interior_integral, interior_value_local
from .solver.mesh import BoundaryMesh
from .solver.peaks import cyclic_maxima

TAU = 0.5
MIN_SEPARATION = 0.1
MARGIN = 1e-12
SQRT_E = float(np.sqrt(np.e))


def _wrap(a):
    return (np.asarray(a, dtype=float) + np.pi) % TWO_PI - np.pi


# ---- peaks ------------------------------------------------------------------

@dataclass(frozen=True)
class Peak:
    center: float   # sector centre the offset is measured from
    offset: float
    height: float

    @property
    def angle(self):
        return float(np.mod(self.center + self.offset, TWO_PI))


@dataclass(frozen=True)
class PeakSet:
    peaks: tuple = ()

    def __len__(self):
        return len(self.peaks)

    def __iter__(self):
        return iter(self.peaks)

    def __getitem__(self, i):
        return self.peaks[i]

    @property
    def angles(self):
        return np.array([pk.angle for pk in self.peaks])

    @property
    def heights(self):
        return np.array([pk.height for pk in self.peaks])


def _node_frame(grid):
    """Sector centre and offset of every node of the full grid."""
    if isinstance(grid, BoundaryMesh):
        return TWO_PI * grid.sector / grid.m, np.asarray(grid.offset)
    th = grid.theta
    return np.zeros_like(th), _wrap(th)


def _evaluator(obj):
    """u at (centre, offset) for a Solution, or the panel/trig interpolant of a trace."""
    sol = obj if hasattr(obj, "trace_at_offset") else None
    trace = obj.trace if sol is not None else obj
    if sol is not None:
        if isinstance(trace.grid, BoundaryMesh):
            # symmetric solutions: every sector centre sees the same profile
            return lambda c, o: sol.trace_at_offset(o)
        return lambda c, o: sol.trace_at(c + np.asarray(o))
    return lambda c, o: trace.at(c + np.asarray(o))


def detect_peaks(obj, tau=TAU, min_separation=MIN_SEPARATION, margin=MARGIN):
    """Strict boundary local maxima of a trace (or Solution) above tau * max.

    A maximum must beat both neighbouring nodes (runs of equal mirror nodes
    counted once) by more than ``margin``; its position and height are then
    refined on the interpolant between those neighbours.
    """
    trace = obj.trace if hasattr(obj, "trace_at_offset") else obj
    v = trace.full
    n = v.size
    centers, offsets = _node_frame(trace.grid)
    evaluate = _evaluator(obj)
    cand = []
    for i in cyclic_maxima(v):
        j = i
        while v[(j + 1) % n] == v[i]:
            j += 1
        left, right = (i - 1) % n, (j + 1) % n
        if not (v[i] - v[left] > margin and v[i] - v[right] > margin):
            continue
        c = centers[i]
        rel = lambda k: offsets[k % n] + float(_wrap(centers[k % n] - c))
        lo, hi = rel(left), rel(right)
        best_o, best_v = offsets[i], v[i]
        res = minimize_scalar(lambda o: -float(evaluate(c, o)[0]), bounds=(lo, hi),
                              method="bounded", options={"xatol": abs(hi - lo) * 1e-10})
        # the symmetric midpoint of a mirror run is a natural candidate too
        for o in (res.x, 0.5 * (rel(i) + rel(j))):
            val = float(evaluate(c, o)[0])
            if val > best_v:
                best_o, best_v = float(o), val
        cand.append(Peak(float(c), float(best_o), best_v))
    if not cand:
        return PeakSet(())
    top = max(pk.height for pk in cand)
    cand = sorted((pk for pk in cand if pk.height >= tau * top), key=lambda pk: -pk.height)
    kept = []
    for pk in cand:
        if all(arc_distance(pk.angle, q.angle) >= min_separation for q in kept):
            kept.append(pk)
    kept.sort(key=lambda pk: pk.angle)
    return PeakSet(tuple(kept))


# ---- record diagnostics -------------------------------------------------------

@dataclass(frozen=True)
class DiagnosticsRecord:
    p: float
    linf: float
    gamma_p: float
    p_energy: float
    mu_p: float
    peaks: PeakSet = field(default_factory=PeakSet)

    @property
    def n_peaks(self):
        return len(self.peaks)


def linf(sol, peaks=None):
    peaks = detect_peaks(sol) if peaks is None else peaks
    top = float(np.max(sol.trace.values))
    if len(peaks):
        top = max(top, float(np.max(peaks.heights)))
    return top


def diagnostics(sol, tau=TAU, min_separation=MIN_SEPARATION):
    peaks = detect_peaks(sol, tau, min_separation)
    sup = linf(sol, peaks)
    return DiagnosticsRecord(p=sol.p, linf=sup, gamma_p=sol.gamma(),
                             p_energy=sol.p * sol.boundary_energy(),
                             mu_p=1.0 / (sol.p * sup ** (sol.p - 1.0)), peaks=peaks)


def holder_gap(sol):
    """Relative slack in p gamma_p <= |dOmega|^{1/(p+1)} p (int u^{p+1})^{p/(p+1)}."""
    p = sol.p
    lhs = p * sol.gamma()
    rhs = TWO_PI ** (1.0 / (p + 1.0)) * p * sol.boundary_energy() ** (p / (p + 1.0))
    return (rhs - lhs) / rhs


# ---- bubble -----------------------------------------------------------------

def bubble_u(t1, t2):
    """U(t) = log(4/(t1^2 + (t2 + 2)^2)) on the closed upper half-plane."""
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    if np.any(t2 < 0):
        raise DomainError("the bubble lives on t2 >= 0")
    out = np.log(4.0 / (t1 * t1 + (t2 + 2.0) ** 2))
    return float(out) if out.ndim == 0 else out


def bubble_mass(tol=1e-12):
    """int_R e^{U(t1, 0)} dt1 by adaptive quadrature (equals 2 pi)."""
    val, _ = quad(lambda t: 4.0 / (t * t + 4.0), -np.inf, np.inf, epsabs=tol, epsrel=tol, limit=200)
    return val


@dataclass(frozen=True)
class RescaledProfile:
    center: float
    mu: float
    grid: np.ndarray
    z_values: np.ndarray
    bubble_error: float

    @property
    def bubble_values(self):
        return bubble_u(self.grid[:, 0], self.grid[:, 1])


def default_profile_grid(t1_max=4.0, n1=33, t2=(0.0, 1.0, 2.0)):
    t1 = np.linspace(-t1_max, t1_max, n1)
    return np.array([(a, b) for b in t2 for a in t1])


def rescaled_profile(sol, peak=None, grid=None):
    """z_p(t) = (p/u(x+)) (u(Psi^{-1}(mu t)) - u(x+)) in the chart at the peak."""
    if peak is None:
        ps = detect_peaks(sol)
        if not len(ps):
            raise ValueError("solution has no peak")
        peak = max(ps, key=lambda pk: pk.height)
    elif not isinstance(peak, Peak):
        a = float(peak)
        peak = Peak(a, 0.0, float(_evaluator(sol)(a, 0.0)[0]))
    grid = default_profile_grid() if grid is None else np.atleast_2d(np.asarray(grid, dtype=float))
    if np.any(grid[:, 1] < 0):
        raise DomainError("profile grid must lie in t2 >= 0")
    evaluate = _evaluator(sol)
    u0 = float(evaluate(peak.center, np.array([peak.offset]))[0])
    mu = 1.0 / (sol.p * u0 ** (sol.p - 1.0))
    y = mu * grid
    if np.any(np.abs(y[:, 0]) > VALIDITY_RADIUS):
        raise OutOfChart("scaled grid leaves the chart")
    xl = chart_at(peak.angle).local_psi_inverse(y)
    u = np.empty(grid.shape[0])
    on = grid[:, 1] == 0.0
    if np.any(on):
        # boundary points of the chart sit at angle arcsin(x1) from the peak
        u[on] = evaluate(peak.center, peak.offset + np.arcsin(xl[on, 0]))
    if np.any(~on):
        u[~on] = interior_value_local(sol, peak.center, xl[~on], phi_offset=peak.offset)
    u[np.all(grid == 0.0, axis=1)] = u0
    z = (sol.p / u0) * (u - u0)
    err = float(np.max(np.abs(z - bubble_u(grid[:, 0], grid[:, 1]))))
    return RescaledProfile(peak.angle, mu, grid, z, err)


# ---- weights ------------------------------------------------------------------

@dataclass(frozen=True)
class WeightEstimate:
    index: int
    r: float
    a_mass: float
    a_energy: float

    @property
    def c1(self):
        return self.a_energy ** 2 / TWO_PI


def _graded_rule(half_width, mu, q=16, ratio=3.0):
    """Gauss nodes/weights on [-half_width, half_width], graded towards 0."""
    from .solver.mesh import Grading, half_edges
    e = half_edges(np.pi / half_width, Grading(ratio, mu / 10.0, min(np.pi / 8, half_width)))
    e = e * (half_width / e[-1])
    x, w = np.polynomial.legendre.leggauss(q)
    c = 0.5 * (e[1:] + e[:-1])
    h = 0.5 * np.diff(e)
    pos = (c[:, None] + h[:, None] * x).ravel()
    pw = (h[:, None] * w).ravel()
    return np.concatenate([-pos[::-1], pos]), np.concatenate([pw[::-1], pw])


def _arc_integrals(sol, peak, half_width, mu):
    o, w = _graded_rule(half_width, mu)
    u = _evaluator(sol)(peak.center, peak.offset + o)
    return float(np.dot(w, u ** sol.p)), float(np.dot(w, u ** (sol.p + 1.0)))


def weights(sol, peaks=None, r=0.3):
    """Per-peak weights from the local mass of f_p = u^p/gamma_p and from the
    local energy, over the boundary arc within chord distance r of each peak."""
    peaks = detect_peaks(sol) if peaks is None else peaks
    ang = peaks.angles
    for i in range(len(ang)):
        for j in range(i + 1, len(ang)):
            if r >= 0.5 * chord(ang[i], ang[j]):
                raise OverlappingBalls(f"r = {r} is not below half the chord between peaks {i} and {j}")
    if not 0 < r < 2:
        raise ValueError("r must lie in (0, 2)")
    half = 2.0 * np.arcsin(0.5 * r)
    gamma = sol.gamma()
    p = sol.p
    out = []
    for i, pk in enumerate(peaks):
        mu = 1.0 / (p * pk.height ** (p - 1.0))
        mass, energy = _arc_integrals(sol, pk, half, mu)
        out.append(WeightEstimate(i, r, mass / gamma,
                                  float(np.sqrt(TWO_PI * energy / ((p + 1.0) * gamma ** 2)))))
    return out


@dataclass(frozen=True)
class LowerBoundReport:
    L0_hat: float
    threshold: float
    a_mass: tuple
    flags: tuple
    skipped: bool = False

    @property
    def passed(self):
        return self.skipped or all(self.flags)


def weight_lower_bound_check(branch, r=0.3, slack=0.1):
    """Compare the final weights with pi/L0, L0 estimated as the max of p gamma_p/e
    over the last third of the branch."""
    recs = list(branch)
    if len(recs) < 3:
        raise ValueError("need at least 3 records")
    tail = recs[len(recs) - max(1, len(recs) // 3):]
    L0 = max(s.p * s.gamma() / np.e for s in tail)
    thr = (np.pi / L0) * (1.0 - slack)
    final = recs[-1]
    peaks = detect_peaks(final)
    if not len(peaks):
        return LowerBoundReport(L0, thr, (), (), skipped=True)
    w = weights(final, peaks, r)
    a = tuple(e.a_mass for e in w)
    return LowerBoundReport(L0, thr, a, tuple(x >= thr for x in a))


# ---- far field and probes -------------------------------------------------------

@dataclass(frozen=True)
class FarFieldReport:
    sup_error: float
    sup_v: float
    conjecture_error: float
    conjecture_scale: float

    @property
    def relative(self):
        return self.sup_error / self.sup_v


def _min_gap(angles):
    if len(angles) < 2:
        return TWO_PI
    a = np.sort(np.mod(angles, TWO_PI))
    return float(np.min(np.diff(np.concatenate([a, [a[0] + TWO_PI]]))))


def far_angles(peaks, min_distance=None, n=720):
    """Angles at arc distance >= min_distance from every peak; by default
    pi/2, shrunk to a quarter of the smallest peak gap for several peaks."""
    if min_distance is None:
        min_distance = min(np.pi / 2, 0.25 * _min_gap(peaks.angles))
    th = TWO_PI * (np.arange(n) + 0.5) / n
    keep = np.ones(n, dtype=bool)
    for a in peaks.angles:
        keep &= arc_distance(th, a) >= min_distance
    return th[keep]


def far_field_compare(sol, weights_, peaks, test_angles=None):
    """sup over test angles of |v_p - sum_i a_i G_b(., x_i)| with v_p = u/gamma_p,
    plus the same for p u against 2 pi sqrt(e) sum_i G_b (reported only)."""
    if not len(peaks):
        raise ValueError("far field needs at least one peak")
    th = far_angles(peaks) if test_angles is None else np.atleast_1d(np.asarray(test_angles, dtype=float))
    near = min(np.pi / 4, 0.25 * _min_gap(peaks.angles))
    if th.size == 0:
        raise ValueError("no test angles")
    for a in peaks.angles:
        if np.any(arc_distance(th, a) < near - 1e-12):
            raise ValueError(f"test angles must stay {near:.4g} away from every peak")
    kern = kernel()
    gamma = sol.gamma()
    u = sol.trace_at(th)
    v = u / gamma
    G = np.array([kern.boundary(th - a) for a in peaks.angles])
    a = np.array([w.a_mass for w in weights_])
    err = float(np.max(np.abs(v - a @ G)))
    conj = float(np.max(np.abs(sol.p * u - 2.0 * np.pi * SQRT_E * G.sum(axis=0))))
    return FarFieldReport(err, float(np.max(np.abs(v))), conj, float(np.max(np.abs(sol.p * u))))


def no_vanishing_margin(sol):
    """linf^{p-1} - lambda_1 (relative to lambda_1)."""
    lam = steklov_lambda1()
    return (linf(sol) ** (sol.p - 1.0) - lam) / lam


def no_vanishing_check(sol, rtol=1e-12):
    return bool(no_vanishing_margin(sol) >= -rtol)


def brezis_merle_probe(sol, k):
    """int_{dOmega} exp(k v_p) dsigma with v_p = u/gamma_p."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return TWO_PI
    g = sol.gamma()
    return sol.trace.integrate(lambda u: np.exp(k * u / g))


def weak_vanishing_probe(branch, testfn, n_r=256, n_theta=1024):
    """sqrt(p) int_Omega u_p phi dx over the records of a branch."""
    return np.array([np.sqrt(s.p) * interior_integral(s, testfn, n_r, n_theta) for s in branch])
