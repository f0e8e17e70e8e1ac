"""Continuation in p along a D_m-symmetric branch.

Each step predicts the new peak height by extrapolation in 1/p, builds the
warm start from the bubble scaling z(s/mu) of the previous record, solves,
regrades the mesh to the computed peak width and solves once more.
"""
from dataclasses import dataclass, field

import numpy as np

from ..errors import (BranchBroken, MaxIterations, PositivityLost, SingularJacobian,
                      StepRefused)
from ..specfun import K_MAX_DEFAULT
from .guess import BACKGROUND, make_initial_guess
from .mesh import GRADING_RATIO, Q_DEFAULT, BoundaryMesh
from .newton import NewtonOptions, newton_solve
from .peaks import count_peaks
from .trace import BoundaryTrace, spectral_grid

_NEWTON_FAILURES = (MaxIterations, PositivityLost, SingularJacobian)


def p_schedule(p_start, p_end, step_ratio):
    if not 1 < p_start < p_end:
        raise ValueError("need 1 < p_start < p_end")
    if not step_ratio > 1:
        raise ValueError("step_ratio must exceed 1")
    ps = [float(p_start)]
    while ps[-1] * step_ratio < p_end * (1 - 1e-12):
        ps.append(ps[-1] * step_ratio)
    ps.append(float(p_end))
    return ps


@dataclass
class Branch:
    records: list
    m: int = 1
    provenance: dict = field(default_factory=dict)
    n_peaks: int = None

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def p_values(self):
        return np.array([s.p for s in self.records])

    def at(self, p):
        """Record with the exponent closest to p."""
        i = int(np.argmin(np.abs(self.p_values - p)))
        return self.records[i]


def _transfer(sol, grid):
    """Old solution's values at the fundamental nodes of a new grid."""
    return np.maximum(sol.trace_at(grid.fund_offsets), BACKGROUND * 1e-3)


def _warm_start(sol, p_new, height, grid):
    """u_new(s) = M_new (1 + z_old(s/mu_new)/p_new), z_old from the previous record,
    blended by max with the far-field scaling (p_old/p_new) u_old."""
    p_old, m_old = sol.p, sol.linf
    mu_old, mu_new = sol.mu, 1.0 / (p_new * height ** (p_new - 1))
    s = grid.fund_offsets
    half = np.pi / grid.m
    z_old = p_old * (sol.trace_at(np.minimum(s * (mu_old / mu_new), half)) / m_old - 1.0)
    near = height * (1.0 + z_old / p_new)
    far = (p_old / p_new) * sol.trace_at(s)
    return np.maximum(np.maximum(near, far), BACKGROUND * 1e-3)


@dataclass(frozen=True)
class _Discretization:
    backend: str = "nystrom"
    k_max: int = K_MAX_DEFAULT
    q: int = Q_DEFAULT
    ratio: float = GRADING_RATIO


def _peaked_grid(m, mu, disc):
    if disc.backend == "spectral":
        return spectral_grid(m, disc.k_max)
    return BoundaryMesh.graded(m, mu, q=disc.q, ratio=disc.ratio)


def _predict_height(records, p_new):
    if len(records) < 2:
        return records[-1].linf
    a, b = records[-2], records[-1]
    x0, x1, x = 1.0 / a.p, 1.0 / b.p, 1.0 / p_new
    return b.linf + (b.linf - a.linf) * (x - x1) / (x1 - x0)


def _step(records, p_new, m, opts, init, disc):
    prev = records[-1]
    if init == "constant":
        values = prev.trace.values ** ((prev.p - 1.0) / (p_new - 1.0))
        return newton_solve(p_new, BoundaryTrace(values, prev.grid), opts)
    height = _predict_height(records, p_new)
    mu_pred = 1.0 / (p_new * height ** (p_new - 1))
    grid = _peaked_grid(m, mu_pred, disc)
    sol = newton_solve(p_new, BoundaryTrace(_warm_start(prev, p_new, height, grid), grid), opts)
    if disc.backend == "spectral":
        return sol
    # regrade to the computed width and solve once more
    grid = _peaked_grid(m, sol.mu, disc)
    return newton_solve(p_new, BoundaryTrace(_transfer(sol, grid), grid), opts)


def _first(p, m, opts, init, disc):
    if init == "constant":
        from ..greenkernel import dtn_eigenvalue
        grid = (spectral_grid(m, disc.k_max) if disc.backend == "spectral"
                else BoundaryMesh.uniform(m, q=disc.q))
        c = dtn_eigenvalue(0) ** (1.0 / (p - 1.0))
        return newton_solve(p, BoundaryTrace(np.full(grid.n_fund, c), grid), opts)
    if init != "peak":
        raise ValueError(f"unknown init {init!r}")
    from .guess import seed_width
    grid = _peaked_grid(m, seed_width(p), disc)
    sol = newton_solve(p, make_initial_guess(m, p, grid), opts)
    if disc.backend == "spectral":
        return sol
    grid = _peaked_grid(m, sol.mu, disc)
    return newton_solve(p, BoundaryTrace(_transfer(sol, grid), grid), opts)


def continuation(p_start, p_end, step_ratio=1.1, m=1, opts=None, *, init="peak",
                 backend="nystrom", k_max=K_MAX_DEFAULT, q=Q_DEFAULT, grading_ratio=GRADING_RATIO,
                 tau=0.5, callback=None):
    """Follow the m-peak (or constant) branch from p_start to p_end.

    Raises StepRefused when Newton fails even after halving a step (in log p)
    and BranchBroken when the number of peaks changes; both carry the
    partial branch.
    """
    opts = NewtonOptions() if opts is None else opts
    if backend not in ("nystrom", "spectral"):
        raise ValueError(f"unknown backend {backend!r}")
    if init not in ("peak", "constant"):
        raise ValueError(f"unknown init {init!r}")
    disc = _Discretization(backend, int(k_max), int(q), float(grading_ratio))
    ps = p_schedule(p_start, p_end, step_ratio)
    prov = {"p_start": float(p_start), "p_end": float(p_end), "step_ratio": float(step_ratio),
            "m": int(m), "init": init, "backend": backend, "k_max": int(k_max),
            "q": int(q), "grading_ratio": float(grading_ratio),
            "newton_tol": opts.newton_tol, "max_iter": opts.max_iter}
    branch = Branch([], m, prov)
    try:
        sol = _first(ps[0], m, opts, init, disc)
    except _NEWTON_FAILURES as exc:
        raise StepRefused(f"initial solve at p = {ps[0]:g} failed: {exc}", branch=branch)
    branch.records.append(sol)
    branch.n_peaks = count_peaks(sol.trace, tau)
    if callback is not None:
        callback(sol)
    for p_new in ps[1:]:
        try:
            sol = _step(branch.records, p_new, m, opts, init, disc)
        except _NEWTON_FAILURES:
            p_mid = float(np.sqrt(branch.records[-1].p * p_new))
            try:
                mid = _step(branch.records, p_mid, m, opts, init, disc)
                sol = _step(branch.records + [mid], p_new, m, opts, init, disc)
            except _NEWTON_FAILURES as exc:
                raise StepRefused(f"Newton failed at p = {p_new:g} after bisecting the step: {exc}",
                                  branch=branch)
        n = count_peaks(sol.trace, tau)
        if n != branch.n_peaks:
            raise BranchBroken(f"peak count changed from {branch.n_peaks} to {n} at p = {p_new:g}",
                               branch=branch)
        branch.records.append(sol)
        if callback is not None:
            callback(sol)
    return branch
