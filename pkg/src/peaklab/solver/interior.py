"""Interior values u(x) = int G(x, y) u(y)^p dsigma(y) and their gradients.

G(x, y) = -(1/pi) log|x - y| + H(x, y).  The log part is integrated panel
by panel, with panels closer than ten of their own lengths subdivided by 8
recursively until each piece is at most half its distance to x.  H is a
cosine series in the angle difference, so its integral is a mode sum
against the Fourier moments of the density.

On the spectral backend the trace is a trigonometric polynomial and the
harmonic extension is summed directly, u = sum_k u_k I_k(r)/I_k(1) e^{ik theta}.
"""
import numpy as np

from ..geometry import TWO_PI
from ..greenkernel import kernel
from ..specfun import scaled_bessel
from .mesh import BoundaryMesh
from scipy.special import spherical_jn

from .quadrature import _projector, gauss_legendre, lagrange_matrix

NEAR_FACTOR = 10.0
OVERSAMPLE = 8
MAX_DEPTH = 40
_SMALL_R = 1e-8


def _as_points(x):
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    x = np.atleast_2d(x)
    if np.any(np.hypot(x[:, 0], x[:, 1]) >= 1.0):
        raise ValueError("interior points must satisfy |x| < 1")
    return x, scalar


def _polar_gradient(r, th, dr, dth_over_r):
    c, s = np.cos(th), np.sin(th)
    return np.stack([c * dr - s * dth_over_r, s * dr + c * dth_over_r], axis=-1)


def split_edges(edges, pieces=3):
    """Split every panel into geometric pieces (uniform for the panel at 0)."""
    e = np.asarray(edges, dtype=float)
    out = [e[:1]]
    frac = np.arange(1, pieces + 1) / pieces
    for a, b in zip(e[:-1], e[1:]):
        if a > 0.0:
            out.append(a * (b / a) ** frac)
        else:
            out.append(a + (b - a) * frac)
    out = np.concatenate(out)
    out[-1] = e[-1]
    return out


def density_mesh(sol):
    """Finer copy of the solution mesh carrying Nystrom-interpolated values.

    Off the nodes a degree q-1 panel polynomial of a ratio-4 graded mesh is
    only good to ~1e-8 near the peak; three geometric pieces per panel bring
    the interpolation error back to rounding level.
    """
    cached = getattr(sol, "_density", None)
    if cached is not None:
        return cached
    mesh = sol.grid
    fine = BoundaryMesh(mesh.m, split_edges(mesh.edges), mesh.q, mesh.grading)
    vals = sol.trace_at(fine.fund_offsets)
    out = (fine, vals)
    object.__setattr__(sol, "_density", out)
    return out


def fourier_moments(sol, k_top):
    """A_k = int f cos(k theta), B_k = int f sin(k theta) for f = u^p.

    Each panel carries the degree q-1 interpolant of f, integrated against
    e^{ik theta} exactly through int P_n(x) e^{i kappa x} dx = 2 i^n j_n(kappa),
    so large k on wide panels is not aliased.  Only the multiples of m
    survive the sum over sectors, and B vanishes by the reflection symmetry.
    """
    mesh, u = density_mesh(sol)
    m, q, nh = mesh.m, mesh.q, mesh.n_fund
    npan = 2 * (mesh.edges.size - 1)
    f = np.concatenate([u[::-1], u]) ** sol.p
    coef = f.reshape(npan, q) @ _projector(q).T  # Legendre coefficients per panel
    pc = mesh.panel_center[:npan]
    ph = mesh.panel_half[:npan]
    k = np.arange(k_top + 1, dtype=float)
    n = np.arange(q)
    phase = (1j) ** n
    A = np.zeros(k_top + 1)
    for j0 in range(0, npan, 16):
        sl = slice(j0, min(npan, j0 + 16))
        kap = ph[sl, None] * k[None, :]
        jn = spherical_jn(n[None, :, None], kap[:, None, :])
        inner = np.einsum("pn,pnk->pk", coef[sl] * phase, jn)
        A += np.sum(2.0 * ph[sl, None] * np.real(np.exp(1j * np.outer(pc[sl], k)) * inner), axis=0)
    A *= m * (np.arange(k_top + 1) % m == 0)
    return A, np.zeros(k_top + 1)


def _regular_sum(r, th, A, B, kern, gradient):
    kt = A.size - 1
    k = np.arange(kt + 1)
    c, dc = kern.regular_modes(r, kt, derivative=True)
    ang = np.outer(th, k)
    cos, sin = np.cos(ang), np.sin(ang)
    phase_c = cos * A + sin * B
    val = np.sum(c * phase_c, axis=1)
    if not gradient:
        return val, None
    phase_s = -sin * A + cos * B
    dr = np.sum(dc * phase_c, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        dth = np.where(r > _SMALL_R, np.sum((c * k) * phase_s, axis=1) / r,
                       # c_k ~ c_k'(0) r^k, only k = 1 survives at the centre
                       dc[:, 1] * phase_s[:, 1] if kt >= 1 else 0.0)
    return val, _polar_gradient(r, th, dr, dth)


def _differences(phi, xi1, xi2, off):
    """x - y in the frame of a sector centre, for x = (1 - xi2) e_r(phi) + xi1 e_theta(phi)
    and boundary nodes y at offsets ``off``; half-angle forms keep full precision
    when x and y are both within a tiny angle of the centre."""
    half_sum = 0.5 * (phi + off)
    sin_half_diff = np.sin(0.5 * (phi - off))
    cp, sp = np.cos(phi), np.sin(phi)
    d0 = -2.0 * np.sin(half_sum) * sin_half_diff - xi2 * cp - xi1 * sp
    d1 = 2.0 * np.cos(half_sum) * sin_half_diff - xi2 * sp + xi1 * cp
    return np.stack([d0, d1], axis=-1)


def _near_log(tgt, pc, ph, vals, p, q, stack):
    """int log|x - y| f dsigma over pieces [ta, tb] of one panel (reference
    coordinates, sector frame) and the x-gradient, with f = (panel interpolant
    of vals)^p; pieces longer than half their distance to x are split 8-fold."""
    x, w = gauss_legendre(q)
    val = 0.0
    grad = np.zeros(2)
    while stack:
        ta, tb, depth = stack.pop()
        tm, th = 0.5 * (ta + tb), 0.5 * (tb - ta)
        t = tm + th * x
        dy = _differences(*tgt, pc + ph * t)
        d2 = np.einsum("ij,ij->i", dy, dy)
        length = 2.0 * ph * th
        if length > 0.5 * np.sqrt(np.min(d2)) and depth < MAX_DEPTH:
            for j in range(OVERSAMPLE):
                a = ta + (tb - ta) * j / OVERSAMPLE
                b = ta + (tb - ta) * (j + 1) / OVERSAMPLE
                stack.append((a, b, depth + 1))
            continue
        fw = (lagrange_matrix(q, t) @ vals) ** p * (ph * th * w)
        val += 0.5 * np.dot(fw, np.log(d2))
        grad += (fw / d2) @ dy
    return val, grad


def _oversampled(sol):
    """First 8-fold oversampling of every panel of the density mesh:
    offsets, weights and density values, shape (npan, 8, q)."""
    cached = getattr(sol, "_oversampled", None)
    if cached is not None:
        return cached
    mesh, u = density_mesh(sol)
    q = mesh.q
    npan = 2 * (mesh.edges.size - 1)
    x, w = gauss_legendre(q)
    sub = -1.0 + (2.0 * np.arange(OVERSAMPLE)[:, None] + 1.0 + x[None, :]) / OVERSAMPLE
    L = lagrange_matrix(q, sub.ravel())
    vals = np.concatenate([u[::-1], u]).reshape(npan, q)
    f = (vals @ L.T).reshape(npan, OVERSAMPLE, q) ** sol.p
    pc = mesh.panel_center[:npan]
    ph = mesh.panel_half[:npan]
    off = pc[:, None, None] + ph[:, None, None] * sub[None]
    wt = (ph[:, None, None] / OVERSAMPLE) * w[None, None, :] * np.ones_like(off)
    out = (off, wt * f, ph / OVERSAMPLE)
    object.__setattr__(sol, "_oversampled", out)
    return out


def _wrap(a, per):
    return a - per * np.round(a / per)


def _log_part(phi, xi1, xi2, sol, gradient):
    """L(x) = int log|x - y| f(y) dsigma(y) on a panel mesh, and grad L, for
    targets x = (1 - xi2) e_r(phi) + xi1 e_theta(phi)."""
    mesh, u = density_mesh(sol)
    m, q, nh = mesh.m, mesh.q, mesh.n_fund
    p = sol.p
    off = mesh.offset[: 2 * nh]
    w = mesh.weights[: 2 * nh]
    vals = np.concatenate([u[::-1], u])
    fw = vals ** p * w
    npan = 2 * (mesh.edges.size - 1)
    pc = mesh.panel_center[:npan]
    ph = mesh.panel_half[:npan]
    n = phi.size
    val = np.zeros(n)
    grad = np.zeros((n, 2))
    for s in range(m):
        a = TWO_PI * s / m
        rot = np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
        phis = _wrap(phi - a, TWO_PI)
        for i in range(n):
            tgt = (phis[i], xi1[i], xi2[i])
            dy = _differences(*tgt, off)
            d2 = np.einsum("ij,ij->i", dy, dy)
            dpc = np.sqrt(np.einsum("ij,ij->i", *(2 * [_differences(*tgt, pc)]))) - ph
            near = np.nonzero(dpc < NEAR_FACTOR * 2.0 * ph)[0]
            keep = np.ones(off.size, dtype=bool)
            for k in near:
                keep[k * q:(k + 1) * q] = False
            with np.errstate(divide="ignore"):
                v = 0.5 * np.dot(fw[keep], np.log(d2[keep]))
            g = (fw[keep] / d2[keep]) @ dy[keep]
            if near.size:
                soff, sfw, sh = _oversampled(sol)
                dys = _differences(*tgt, soff[near])
                d2s = np.einsum("...j,...j->...", dys, dys)
                ok = 2.0 * sh[near, None] <= 0.5 * np.sqrt(np.min(d2s, axis=-1))
                fw_ok = np.where(ok[..., None], sfw[near], 0.0)
                with np.errstate(divide="ignore"):
                    v += 0.5 * np.sum(fw_ok * np.where(ok[..., None], np.log(d2s), 0.0))
                    g += np.einsum("abk,abkj->j", np.where(ok[..., None], fw_ok / d2s, 0.0), dys)
                for a, b in zip(*np.nonzero(~ok)):
                    k = near[a]
                    ta = -1.0 + 2.0 * b / OVERSAMPLE
                    nv, ng = _near_log(tgt, pc[k], ph[k], vals[k * q:(k + 1) * q], p, q,
                                       [(ta, ta + 2.0 / OVERSAMPLE, 1)])
                    v += nv
                    g += ng
            val[i] += v
            grad[i] += rot @ g
    return val, (grad if gradient else None)


def _nystrom_interior(sol, phi, xi1, xi2, gradient, k_top, phi_offset=None):
    kern = kernel()
    if phi_offset is not None:
        # (centre, offset) pairs: the local frame sits at centre + offset
        xi1, xi2 = _shift_frame(phi_offset, xi1, xi2)
    x = ((1.0 - xi2) * np.stack([np.cos(phi), np.sin(phi)])
         + xi1 * np.stack([-np.sin(phi), np.cos(phi)])).T
    r = np.minimum(np.hypot(x[:, 0], x[:, 1]), 1.0)
    th = np.arctan2(x[:, 1], x[:, 0])
    if k_top is None:
        k_top = kern.mode_count(r)
    A, B = fourier_moments(sol, k_top)
    h, gh = _regular_sum(r, th, A, B, kern, gradient)
    L, gL = _log_part(phi, xi1, xi2, sol, gradient)
    u = -L / np.pi + h
    if not gradient:
        return u, None
    return u, -gL / np.pi + gh


def _spectral_interior(sol, x, gradient):
    F = sol.trace.coefficients()
    kt = F.size - 1
    r = np.hypot(x[:, 0], x[:, 1])
    th = np.arctan2(x[:, 1], x[:, 0])
    # real form: u = sum_k wk Re(F_k e^{ik th}) I_k(r)/I_k(1), Nyquist counted once
    wk = np.full(kt + 1, 2.0)
    wk[0] = 1.0
    wk[-1] = 1.0
    A, B = wk * F.real, -wk * F.imag
    val, der = scaled_bessel(r, kt)
    k = np.arange(kt + 1)
    ang = np.outer(th, k)
    cos, sin = np.cos(ang), np.sin(ang)
    u = np.sum(val * (cos * A + sin * B), axis=1)
    if not gradient:
        return u, None
    ps = -sin * A + cos * B
    dr = np.sum(der * (cos * A + sin * B), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        dth = np.where(r > _SMALL_R, np.sum(val * k * ps, axis=1) / r,
                       der[:, 1] * ps[:, 1])
    return u, _polar_gradient(r, th, dr, dth)


def interior_value(sol, x, gradient=True, k_top=None):
    """u(x) and grad u(x) for points |x| < 1 (a point or an (n, 2) array)."""
    xa, scalar = _as_points(x)
    if isinstance(sol.grid, BoundaryMesh):
        r = np.hypot(xa[:, 0], xa[:, 1])
        phi = np.arctan2(xa[:, 1], xa[:, 0])
        u, g = _nystrom_interior(sol, phi, np.zeros_like(r), 1.0 - r, gradient, k_top)
    else:
        u, g = _spectral_interior(sol, xa, gradient)
    if scalar:
        u = float(u[0])
        g = None if g is None else g[0]
    return (u, g) if gradient else u


def _shift_frame(offset, xi1, xi2):
    """Coordinates in the frame at angle 0 of a point given in the frame at
    angle ``offset`` (exact rotation, fine for tiny offsets)."""
    c, s = np.cos(offset), np.sin(offset)
    one_minus_c = 2.0 * np.sin(0.5 * offset) ** 2
    # x = (1 - xi2) e_r(off) + xi1 e_t(off) = (1 - X2) e_r(0) + X1 e_t(0)
    X1 = (1.0 - xi2) * s + xi1 * c
    X2 = one_minus_c + xi2 * c + xi1 * s
    return X1, X2


def interior_value_local(sol, center, xi, gradient=False, k_top=None, phi_offset=0.0):
    """u at x = (1 - xi2) e_r(a) + xi1 e_theta(a), a = center + phi_offset, for
    local offsets xi (n, 2), keeping full precision for tiny offsets."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    phi = np.full(xi.shape[0], float(center))
    if isinstance(sol.grid, BoundaryMesh):
        u, g = _nystrom_interior(sol, phi, xi[:, 0], xi[:, 1], gradient, k_top,
                                 phi_offset if phi_offset else None)
    else:
        phi = phi + phi_offset
        x = ((1.0 - xi[:, 1]) * np.stack([np.cos(phi), np.sin(phi)])
             + xi[:, 0] * np.stack([-np.sin(phi), np.cos(phi)])).T
        u, g = _spectral_interior(sol, x, gradient)
    return (u, g) if gradient else u


def boundary_modes(sol, k_top=None):
    """Complex Fourier coefficients u_k (k = 0..k_top) of the boundary trace,
    u(theta) = sum_k w_k Re(u_k e^{ik theta}) with w_0 = 1, w_k = 2.

    On the Nystrom backend u = Lambda^{-1} u^p gives u_k = f_k/(2 pi lambda_k)
    from the moments f_k of the density.
    """
    kern = kernel()
    if isinstance(sol.grid, BoundaryMesh):
        k_top = kern.k_max if k_top is None else int(k_top)
        A, B = fourier_moments(sol, k_top)
        return (A - 1j * B) / (TWO_PI * kern.lam[: k_top + 1])
    F = sol.trace.coefficients()
    F = F.copy()
    F[-1] *= 0.5  # Nyquist term carries weight 1, store it as half
    if k_top is not None:
        F = F[: int(k_top) + 1]
    return F


def mode_field(sol, r, n_theta=1024, k_top=None):
    """u, u_r and u_theta/r on the polar grid r x (2 pi l/n_theta) from the
    harmonic extension of the trace modes, I_k(r)/I_k(1)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    F = boundary_modes(sol, k_top)
    kt = F.size - 1
    val, der = scaled_bessel(r, kt)
    k = np.arange(kt + 1)
    wk = np.where(k == 0, 1.0, 2.0)
    nt = int(n_theta)

    def synth(C):
        # real field sum_k wk Re(C_k e^{ik theta}) sampled at nt angles (aliased)
        out = np.zeros((C.shape[0], nt // 2 + 1), dtype=complex)
        kk = k % nt
        fold = np.where(kk <= nt // 2, kk, nt - kk)
        conj = kk > nt // 2
        Cw = C * wk
        Cw = np.where(conj[None, :], np.conj(Cw), Cw)
        for j in range(C.shape[0]):
            np.add.at(out[j], fold, Cw[j])
        # irfft expects the rfft scaling; the Nyquist/zero bins of a real
        # series are real, so halving them is exact
        out[:, 0] = 2.0 * out[:, 0].real
        if nt % 2 == 0:
            out[:, -1] = 2.0 * out[:, -1].real
        return np.fft.irfft(out, nt) * nt * 0.5

    u = synth(val * F)
    ur = synth(der * F)
    with np.errstate(divide="ignore", invalid="ignore"):
        ut = synth(np.where(r[:, None] > 0, val * (1j * k) / r[:, None], 0.0) * F)
    return u, ur, ut


def _radial_rule(n_r):
    """Gauss-Jacobi nodes on [0, 1] for the weight r."""
    from scipy.special import roots_jacobi
    x, w = roots_jacobi(n_r, 0.0, 1.0)
    return 0.5 * (x + 1.0), w / 4.0


def interior_energy(sol, n_r=256, n_theta=1024, k_top=None):
    """int_Omega |grad u|^2 + u^2 dx on a polar tensor grid."""
    r, w = _radial_rule(n_r)
    u, ur, ut = mode_field(sol, r, n_theta, k_top)
    dens = (ur ** 2 + ut ** 2 + u ** 2).mean(axis=1) * TWO_PI
    return float(np.dot(w, dens))


def interior_integral(sol, testfn, n_r=256, n_theta=1024, k_top=None):
    """int_Omega u phi dx for a test function phi(x, y) on a polar tensor grid."""
    r, w = _radial_rule(n_r)
    u, _, _ = mode_field(sol, r, n_theta, k_top)
    th = TWO_PI * np.arange(n_theta) / n_theta
    X = r[:, None] * np.cos(th)[None, :]
    Y = r[:, None] * np.sin(th)[None, :]
    phi = np.broadcast_to(np.asarray(testfn(X, Y), dtype=float), X.shape)
    return float(np.dot(w, (u * phi).mean(axis=1) * TWO_PI))
