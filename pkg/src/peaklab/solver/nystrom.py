"""Nystrom discretisation of the boundary operator K[f](t) = int G_b(t - s) f(s) ds
for D_m-symmetric densities.

A symmetric density is determined by its values on sector 0, and summing
the kernel over the m rotated copies gives the periodised kernel G^m (see
:class:`peaklab.greenkernel.BoundaryKernel`).  So the operator needs only
sector-0 sources:

    K[f](t) = int_{-pi/m}^{pi/m} G^m(t - s) f(s) ds.

Far panel pairs use the plain Gauss rule.  When the target sits within
NEAR_RADIUS half-lengths of a source panel the singular and non-smooth
pieces are integrated with product weights,

    K_ij = A(d) W^log_ij + B(d) W^abs_ij + w_j (Rem(d) - |d| B(d)),

with ``Rem = G^m - A log|d|`` and ``W^log``, ``W^abs`` integrating
``log|t - s|`` and ``|t - s|`` against the panel interpolant.
"""
import numpy as np
from scipy.linalg import lu_factor, lu_solve

from ..errors import SingularJacobian
from ..geometry import TWO_PI
from ..greenkernel import periodic_kernel
from .quadrature import NEAR_RADIUS, abs_weights, gauss_legendre, log_weights

_ROW_BLOCK = 96


def _wrap_sector(d, m):
    """Reduce angle differences into (-pi/m, pi/m]."""
    per = TWO_PI / m
    out = np.asarray(d, dtype=float)
    big = np.abs(out) > 0.5 * per
    if np.any(big):
        out = np.where(big, out - per * np.round(out / per), out)
    return out


def kernel_matrix(mesh, t_offset, kern=None):
    """Weighted kernel matrix from the sector-0 nodes to targets at the given
    offsets (angles measured from any peak centre; only the offset matters)."""
    m = mesh.m
    kern = periodic_kernel(m) if kern is None else kern
    t_offset = np.atleast_1d(np.asarray(t_offset, dtype=float))
    nt = t_offset.size
    ns = 2 * mesh.n_fund
    src = mesh.offset[:ns]
    w = mesh.weights[:ns]
    out = np.empty((nt, ns))
    for r0 in range(0, nt, _ROW_BLOCK):
        sl = slice(r0, min(nt, r0 + _ROW_BLOCK))
        d = _wrap_sector(t_offset[sl, None] - src[None, :], m)
        A, T = kern.parts(d)
        with np.errstate(divide="ignore", invalid="ignore"):
            out[sl] = (A * np.log(2.0 * np.abs(np.sin(0.5 * m * d))) + T) * w
    _near_correction(out, mesh, t_offset, kern)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite kernel entry (target on a node?)")
    return out


def _near_correction(out, mesh, t_offset, kern):
    q = mesh.q
    npan = 2 * (mesh.edges.size - 1)
    pc = mesh.panel_center[:npan]
    ph = mesh.panel_half[:npan]
    w = mesh.weights[: 2 * mesh.n_fund]
    dc = _wrap_sector(t_offset[:, None] - pc[None, :], mesh.m)
    a = dc / ph[None, :]
    it, ip = np.nonzero(np.abs(a) < NEAR_RADIUS)
    if it.size == 0:
        return
    x, wq = gauss_legendre(q)
    h = ph[ip]
    aa = a[it, ip]
    W = h[:, None] * (log_weights(aa, q) + np.log(h)[:, None] * wq[None, :])
    V = (h * h)[:, None] * abs_weights(aa, q)
    cols = ip[:, None] * q + np.arange(q)[None, :]
    # differences in the panel frame keep full precision for tiny panels
    d = dc[it, ip][:, None] - h[:, None] * x[None, :]
    B = kern.kink(d)
    smooth = kern.boundary_remainder(d) - np.abs(d) * B
    out[it[:, None], cols] = kern.log_coefficient(d) * W + B * V + w[cols] * smooth


def reduced_operator(mesh, kern=None):
    """Symmetry-reduced Nystrom matrix acting on fundamental node values."""
    nh = mesh.n_fund
    K = kernel_matrix(mesh, mesh.offset[nh: 2 * nh], kern)
    return K[:, nh:] + K[:, :nh][:, ::-1]


def sector_density(mesh, fund_values):
    """Sector-0 node values (mirrored half first) from fundamental values."""
    f = np.asarray(fund_values)
    return np.concatenate([f[::-1], f])


def apply_at(mesh, fund_density, t_offset, kern=None):
    """K[density] at target offsets, for a symmetric density given on the fundamental nodes."""
    return kernel_matrix(mesh, t_offset, kern) @ sector_density(mesh, fund_density)


def angle_to_offset(mesh, theta):
    """Offsets in (-pi/m, pi/m] of angles from the nearest peak centre."""
    return _wrap_sector(np.atleast_1d(np.asarray(theta, dtype=float)), mesh.m)


class NystromOperator:
    """K on a symmetric panel mesh, reduced to the fundamental nodes."""

    backend = "nystrom"

    def __init__(self, mesh):
        self.grid = mesh
        self.m = mesh.m
        self.kern = periodic_kernel(mesh.m)
        self._matrix = None

    @property
    def n(self):
        return self.grid.n_fund

    @property
    def matrix(self):
        if self._matrix is None:
            self._matrix = reduced_operator(self.grid, self.kern)
        return self._matrix

    def apply(self, f):
        return self.matrix @ f

    def jacobian_solve(self, d, rhs):
        """Solve (I - K diag(d)) x = rhs densely."""
        J = np.eye(self.n) - self.matrix * d[None, :]
        if not np.all(np.isfinite(J)):
            raise SingularJacobian("non-finite Jacobian entries")
        lu = lu_factor(J)
        if np.min(np.abs(np.diag(lu[0]))) == 0.0:
            raise SingularJacobian("zero pivot in the Nystrom Jacobian")
        return lu_solve(lu, rhs)

    def evaluate(self, f, theta):
        """K[f] at arbitrary angles (the Nystrom interpolant)."""
        return apply_at(self.grid, f, angle_to_offset(self.grid, theta), self.kern)

    def evaluate_offsets(self, f, offset):
        """K[f] at offsets from a sector centre."""
        return apply_at(self.grid, f, _wrap_sector(offset, self.m), self.kern)
