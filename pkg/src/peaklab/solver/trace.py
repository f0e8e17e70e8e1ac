"""Boundary traces and the discrete operator attached to their grid."""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import PositivityLost
from ..specfun import K_MAX_DEFAULT
from .mesh import BoundaryMesh, UniformGrid
from .nystrom import NystromOperator, angle_to_offset
from .quadrature import lagrange_matrix
from .spectral import SpectralOperator


@lru_cache(maxsize=6)
def operator_for(grid):
    """Discrete K = Lambda^{-1} on a grid (cached by grid identity)."""
    if isinstance(grid, BoundaryMesh):
        return NystromOperator(grid)
    if isinstance(grid, UniformGrid):
        op = SpectralOperator(grid.m, grid.n // 2)
        if op.grid.n != grid.n:
            raise ValueError("uniform grid size must be a multiple of 2m")
        op.grid = grid
        return op
    raise TypeError(f"unknown grid type {type(grid).__name__}")


def spectral_grid(m=1, k_max=K_MAX_DEFAULT):
    k = m * (-(-int(k_max) // m))
    return UniformGrid(2 * k, m)


@dataclass(frozen=True, eq=False)
class BoundaryTrace:
    """A D_m-symmetric boundary function stored by its fundamental node values.

    The first peak sits at theta = 0; every value on the circle follows from
    the rotations by 2 pi/m and the reflection theta -> -theta.
    """

    values: np.ndarray
    grid: object

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n_fund,):
            raise ValueError(f"expected {self.grid.n_fund} values, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def m(self):
        return self.grid.m

    @property
    def backend(self):
        return "nystrom" if isinstance(self.grid, BoundaryMesh) else "spectral"

    @property
    def offsets(self):
        return self.grid.fund_offsets

    @property
    def full(self):
        """Values at every node of the grid."""
        return self.grid.expand(self.values)

    @property
    def theta(self):
        return self.grid.theta

    @property
    def weights(self):
        return self.grid.weights

    def integrate(self, f=None):
        """Boundary integral of the trace (or of f applied to it)."""
        v = self.full if f is None else f(self.full)
        return self.grid.integrate(v)

    def sup(self):
        return float(np.max(self.values))

    def with_values(self, values):
        return BoundaryTrace(values, self.grid)

    def __mul__(self, c):
        return self.with_values(self.values * float(c))

    __rmul__ = __mul__

    def sup_norm(self):
        return float(np.max(np.abs(self.values)))

    def coefficients(self):
        """rfft-normalised Fourier coefficients (spectral grids only)."""
        if not isinstance(self.grid, UniformGrid):
            raise TypeError("Fourier coefficients need a uniform grid")
        return np.fft.rfft(self.full) / self.grid.n

    def at(self, theta):
        """Interpolated values: panel polynomials (mesh) or trigonometric (grid)."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if isinstance(self.grid, UniformGrid):
            from .spectral import _fourier_eval
            return _fourier_eval(self.coefficients(), theta)
        return panel_interpolate(self.grid, self.values, theta)

    def check_positive(self):
        if not np.all(self.values > 0.0):
            raise PositivityLost(f"trace has nonpositive values (min {np.min(self.values):.3e})")


def panel_interpolate(mesh, fund_values, theta):
    """Degree q-1 panel interpolation of a symmetric nodal function."""
    off = np.abs(angle_to_offset(mesh, theta))
    e = mesh.edges
    pan = np.clip(np.searchsorted(e, off, side="right") - 1, 0, e.size - 2)
    c = 0.5 * (e[pan] + e[pan + 1])
    h = 0.5 * (e[pan + 1] - e[pan])
    # with the offset below the panel width, keep precision by working in offsets
    t = (off - c) / h
    out = np.empty(off.size)
    q = mesh.q
    v = np.asarray(fund_values).reshape(-1, q)
    for k in np.unique(pan):
        sel = pan == k
        out[sel] = lagrange_matrix(q, t[sel]) @ v[k]
    return out
