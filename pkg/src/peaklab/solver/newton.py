"""Damped Newton iteration for the boundary equation u = K[u^p]."""
from dataclasses import dataclass, field

import numpy as np

from ..errors import MaxIterations, PositivityLost, SingularJacobian
from .trace import BoundaryTrace, operator_for

POSITIVITY_FLOOR = 1e-8


@dataclass(frozen=True)
class NewtonOptions:
    newton_tol: float = 1e-10
    max_iter: int = 50
    # one step even from a converged start: a warm start can meet the
    # tolerance while still sitting off the discrete solution
    min_iter: int = 1
    min_damping: float = 2.0 ** -30
    floor: float = POSITIVITY_FLOOR

    def __post_init__(self):
        if not self.newton_tol > 0:
            raise ValueError("newton_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


def _power(u, p):
    with np.errstate(over="ignore", invalid="ignore"):
        return u ** p


def _fixed_point_residual(op, u, p):
    return u - op.apply(_power(u, p))


def residual(trace, p):
    """Pointwise residual u - K[u^p] of the trace's backend."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    trace.check_positive()
    op = operator_for(trace.grid)
    return trace.with_values(_fixed_point_residual(op, trace.values, p))


@dataclass(frozen=True, eq=False)
class Solution:
    p: float
    trace: BoundaryTrace
    residual_norm: float
    iterations: int = 0
    history: tuple = field(default=(), repr=False)

    @property
    def backend(self):
        return self.trace.backend

    @property
    def m(self):
        return self.trace.m

    @property
    def grid(self):
        return self.trace.grid

    @property
    def operator(self):
        return operator_for(self.trace.grid)

    def trace_at(self, theta):
        """Boundary values off the nodes through the integral form u = K[u^p]
        (Nystrom) or the trigonometric interpolant (spectral)."""
        if self.backend == "spectral":
            return self.trace.at(theta)
        return self.operator.evaluate(_power(self.trace.values, self.p), theta)

    def trace_at_offset(self, offset):
        """Boundary values at offsets from the first peak centre (any sector
        centre gives the same values by symmetry).  Offsets keep full precision
        down to the smallest panels, which absolute angles cannot."""
        offset = np.atleast_1d(np.asarray(offset, dtype=float))
        if self.backend == "spectral":
            return self.trace.at(offset)
        return self.operator.evaluate_offsets(_power(self.trace.values, self.p), offset)

    @property
    def linf(self):
        """Sup of the trace, including the value at the first peak centre."""
        return max(float(np.max(self.trace.values)), float(self.trace_at_offset(0.0)[0]))

    @property
    def mu(self):
        """Peak width (p linf^{p-1})^{-1}."""
        return 1.0 / (self.p * self.linf ** (self.p - 1.0))

    def gamma(self):
        return self.trace.integrate(lambda v: _power(v, self.p))

    def boundary_energy(self):
        return self.trace.integrate(lambda v: _power(v, self.p + 1.0))

    def interior_eval(self, x):
        from .interior import interior_value
        return interior_value(self, x)


def newton_solve(p, init, opts=None):
    """Solve u = K[u^p] on init's grid starting from init."""
    opts = NewtonOptions() if opts is None else opts
    if not p > 1:
        raise ValueError("p must exceed 1")
    init.check_positive()
    op = operator_for(init.grid)
    u = np.array(init.values, dtype=float)
    F = _fixed_point_residual(op, u, p)
    norm = float(np.max(np.abs(F)))
    history = [norm]
    for it in range(opts.max_iter + 1):
        if norm <= opts.newton_tol and it >= opts.min_iter:
            return Solution(p, init.with_values(u), norm, it, tuple(history))
        if it == opts.max_iter:
            break
        d = p * _power(u, p - 1)
        try:
            du = -op.jacobian_solve(d, F)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise SingularJacobian(f"Jacobian solve failed at iteration {it}: {exc}")
        if not np.all(np.isfinite(du)):
            raise SingularJacobian(f"non-finite Newton step at iteration {it}")
        alpha = 1.0
        positivity_blocked = False
        while True:
            trial = u + alpha * du
            if np.min(trial) >= opts.floor:
                Ft = _fixed_point_residual(op, trial, p)
                nt = float(np.max(np.abs(Ft)))
                if np.isfinite(nt) and (nt < norm or (nt <= opts.newton_tol and alpha == 1.0)):
                    break
                positivity_blocked = False
            else:
                positivity_blocked = True
            alpha *= 0.5
            if alpha < opts.min_damping:
                if positivity_blocked:
                    raise PositivityLost(f"line search hit the positivity floor at iteration {it}")
                raise MaxIterations(f"line search stalled at iteration {it} (residual {norm:.3e})")
        u, F, norm = trial, Ft, nt
        history.append(norm)
    raise MaxIterations(f"no convergence in {opts.max_iter} iterations (residual {norm:.3e})")
