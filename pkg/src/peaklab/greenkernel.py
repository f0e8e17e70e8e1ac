"""Neumann Green function of ``Delta G = G`` in the unit disk with a boundary
Dirac flux, its regular part, the Robin function and the DtN spectrum.

On the disk every Fourier mode separates: with ``lambda_k = I_k'(1)/I_k(1)``

    G(x, y) = sum_k g_k I_k(r)/I_k(1) cos(k (theta - theta_y)),
    g_0 = 1/(2 pi lambda_0),  g_k = 1/(pi lambda_k).

On the boundary the trace splits as ``-(1/pi) log(2|sin(d/2)|) + S(d)``
where ``S`` has coefficients ``(1/lambda_k - 1/k)/pi = O(k^-3)``.  The
leading terms of that expansion are modelled by ``sum_j beta_j/(k+j)``,
whose cosine series is elementary; it contributes another multiple of the
log, so all log terms are collected as

    G_b(d) = A(d) log(2|sin(d/2)|) + T(d),
    A(d)   = -(1 - P(d)) / pi,   P(d) = -sum_j beta_j cos(j d),

and only a k^-6 remainder ``D`` is tabulated.  Nystrom assembly uses
exactly this form.
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ModeOverflow, SingularPoint
from .geometry import DiskBoundaryPoint, TWO_PI, wrap_angle
from .specfun import K_MAX_DEFAULT, BesselTable, scaled_bessel

TABLE_SIZE = 8192

# asymptotic expansion of 1/lambda_k - 1/k in powers of 1/k (from k^-1 on),
# obtained by iterating r_k = 1/(2k + r_{k+1}) as a series in 1/k
EXPANSION = (0.0, 0.0, -1 / 2, 1 / 2, -1 / 8, -1 / 2, 21 / 16, -9 / 4, 371 / 128)


class DtnSpectrum:
    """DtN eigenvalues ``lambda_k = k + I_{k+1}(1)/I_k(1)`` for 0 <= k <= k_max."""

    def __init__(self, k_max=K_MAX_DEFAULT):
        self.k_max = int(k_max)
        self.table = BesselTable(self.k_max)
        self.lam = self.table.log_derivative.copy()
        self.lam.setflags(write=False)

    def __getitem__(self, k):
        if k < 0 or k > self.k_max:
            raise ModeOverflow(f"mode {k} outside [0, {self.k_max}]")
        return float(self.lam[k])

    def smooth_coefficients(self):
        """1/lambda_k - 1/k for k = 1..k_max, computed without cancellation."""
        k = np.arange(1, self.k_max + 1)
        r = self.lam[1:] - k  # = I_{k+1}(1)/I_k(1)
        return -r / (k * self.lam[1:])

    def green_coefficients(self):
        g = 1.0 / (np.pi * self.lam)
        g[0] = 1.0 / (2.0 * np.pi * self.lam[0])
        return g


@lru_cache(maxsize=4)
def spectrum(k_max=K_MAX_DEFAULT):
    return DtnSpectrum(k_max)


def dtn_eigenvalue(k, k_max=K_MAX_DEFAULT):
    return spectrum(k_max)[k]


def steklov_lambda1(k_max=K_MAX_DEFAULT):
    """Smallest Steklov eigenvalue of Delta u = u on the disk."""
    return float(np.min(spectrum(k_max).lam))


def _tail_weights(expansion=EXPANSION):
    """beta_j with sum_j beta_j/(k+j) = sum_n expansion[n-1] k^-n + O(k^-(J+2))."""
    order = len(expansion) - 1
    j = np.arange(order + 1, dtype=float)
    # 1/(k+j) = sum_n (-j)^(n-1) k^-n
    V = np.array([(-j) ** n for n in range(order + 1)])
    V[0] = 1.0
    return np.linalg.solve(V, np.array(expansion, dtype=float))


TAIL_BETA = _tail_weights()


def tail_model(k, beta=TAIL_BETA):
    """Closed-form-summable model sum_j beta_j/(k+j) of 1/lambda_k - 1/k."""
    k = np.asarray(k, dtype=float)
    return sum(b / (k + j) for j, b in enumerate(beta))


def _harmonics(x, order):
    c = [np.ones_like(x), np.cos(x)]
    s = [np.zeros_like(x), np.sin(x)]
    for j in range(2, order + 1):
        c.append(2.0 * c[1] * c[j - 1] - c[j - 2])
        s.append(2.0 * c[1] * s[j - 1] - s[j - 2])
    return c, s


def _tail_sum(x, beta=TAIL_BETA, order=0):
    """sum_k tail_model(k) cos(k x) = P(x) log(2 sin(x/2)) + E(x) on 0 < x < 2 pi.

    Uses sum_k z^k/(k+j) = z^-j (L - sum_{i<=j} z^i/i), L = -log(1 - z).
    Returns the ``order``-th derivatives (order 0, 1 or 2) of P and E.
    """
    x = np.asarray(x, dtype=float)
    c, s = _harmonics(x, len(beta) - 1)
    v = 0.5 * (np.pi - x)
    P = np.zeros_like(x)
    E = np.zeros_like(x)
    for j, b in enumerate(beta):
        if order == 0:
            P -= b * c[j]
            E += b * (s[j] * v - sum(c[l] / (j - l) for l in range(j)))
        elif order == 1:
            P += b * j * s[j]
            E += b * (j * c[j] * v - 0.5 * s[j] + sum(l * s[l] / (j - l) for l in range(j)))
        else:
            P += b * j * j * c[j]
            E += b * (-j * j * s[j] * v - j * c[j] + sum(l * l * c[l] / (j - l) for l in range(j)))
    return P, E


# Hermite quintic basis on [0, 1] (rows: coefficients of t^0..t^5) for the
# data f0, h f0', h^2 f0'', f1, h f1', h^2 f1''
_HERMITE = np.array([
    [1, 0, 0, -10, 15, -6],
    [0, 1, 0, -6, 8, -3],
    [0, 0, 0.5, -1.5, 1.5, -0.5],
    [0, 0, 0, 10, -15, 6],
    [0, 0, 0, -4, 7, -3],
    [0, 0, 0, 0.5, -1, 0.5],
])


def _cell_coefficients(tab):
    """Per-cell polynomial coefficients from a table (n, 3, c) of f, f', f''."""
    n = tab.shape[0]
    h = TWO_PI / n
    scale = np.array([1.0, h, h * h])[None, :, None]
    left = tab * scale
    right = np.roll(left, -1, axis=0)
    data = np.concatenate([left, right], axis=1)  # (n, 6, c)
    coef = np.einsum("kp,nkc->ncp", _HERMITE, data)
    return np.ascontiguousarray(coef)


def _hermite_eval(coef, x, derivative=False):
    n = coef.shape[0]
    h = TWO_PI / n
    s = np.mod(np.asarray(x, dtype=float), TWO_PI) * (n / TWO_PI)
    i = np.minimum(s.astype(np.int64), n - 1)
    t = (s - i)[..., None]
    C = coef[i]
    val = C[..., 5]
    for p in range(4, -1, -1):
        val = val * t + C[..., p]
    if not derivative:
        return val, None
    der = 5.0 * C[..., 5]
    for p in range(4, 0, -1):
        der = der * t + p * C[..., p]
    return val, der / h


class BoundaryKernel:
    """Boundary trace of the m-periodised Green function.

    ``G^m(d) = sum_s G_b(d + 2 pi s/m)`` has Fourier coefficients
    ``m/(pi lambda_{mk})`` in ``y = m d``, so it splits like G_b itself:

        G^m(d) = A(y) log(2|sin(y/2)|) + T(y).

    ``A`` and ``T`` are tabulated with two derivatives and evaluated by
    quintic Hermite interpolation.  ``T`` is only C^2 at y = 0 (odd powers
    of |y| from the even-order terms of the expansion), but 0 is a table
    node, so every interpolation cell sees a smooth function.  Period 1 is
    the plain boundary Green function.
    """

    def __init__(self, k_max=K_MAX_DEFAULT, period=1, table_size=TABLE_SIZE):
        self.k_max = int(k_max)
        self.period = m = int(period)
        if m < 1:
            raise ValueError("period must be >= 1")
        self.spectrum = spectrum(self.k_max)
        self.lam = self.spectrum.lam
        self.s0 = 1.0 / (2.0 * np.pi * self.lam[0])
        n_modes = self.k_max // m
        if table_size < 2 * n_modes:
            raise ValueError("table_size must be at least 2*k_max/period")
        a_full = self.spectrum.smooth_coefficients()
        k = np.arange(1, n_modes + 1)
        self.a = m * a_full[m * k - 1]
        self.beta = _tail_weights(tuple(c * float(m) ** (-n) for n, c in enumerate(EXPANSION)))
        self.d = self.a - tail_model(k, self.beta)
        n = int(table_size)
        self.table_size = n
        self.table_angles = TWO_PI * np.arange(n) / n
        # remainder D(y) = sum d_k cos(k y) and two derivatives, by FFT
        kk = np.arange(1, min(n_modes, n // 2) + 1)
        D = []
        for order in range(3):
            c = np.zeros(n // 2 + 1, dtype=complex)
            c[kk] = 0.5 * n * (1j * kk) ** order * self.d[kk - 1]
            if n_modes >= n // 2:
                c[n // 2] = 2.0 * c[n // 2] if order % 2 == 0 else 0.0
            D.append(np.fft.irfft(c, n))
        tab = np.empty((n, 3, 2))
        for order in range(3):
            P, E = _tail_sum(self.table_angles, self.beta, order)
            tab[:, order, 0] = -((1.0 if order == 0 else 0.0) - P) / np.pi
            tab[:, order, 1] = (E + D[order]) / np.pi
        tab[:, 0, 1] += m * self.s0
        self._tab = tab
        self._coef = _cell_coefficients(tab)
        self.robin_value = float(tab[0, 0, 1] - np.log(m) / np.pi)

    # ---- boundary pieces -------------------------------------------------
    def parts(self, delta, derivative=False):
        """(A, T) with G^m = A log(2|sin(m delta/2)|) + T; with derivative=True
        returns (A, T, A', T'), derivatives taken in delta."""
        y = self.period * np.asarray(delta, dtype=float)
        val, der = _hermite_eval(self._coef, y, derivative)
        if derivative:
            der = der * self.period
            return val[..., 0], val[..., 1], der[..., 0], der[..., 1]
        return val[..., 0], val[..., 1]

    def log_coefficient(self, delta):
        """A: coefficient of log(2|sin(m delta/2)|) in the boundary trace."""
        return self.parts(delta)[0]

    def smooth(self, delta):
        """T, the C^2 part of the boundary trace."""
        return self.parts(delta)[1]

    def smooth_derivative(self, delta):
        return self.parts(delta, derivative=True)[3]

    def kink(self, delta):
        """B with T - |delta| B(delta) smooth to O(|delta|^(J+1)) at 0."""
        m = self.period
        y = m * np.asarray(delta, dtype=float)
        j = np.arange(len(self.beta))
        return 0.5 * m * np.sum(self.beta * j * np.sinc(np.multiply.outer(y, j) / np.pi), axis=-1)

    def boundary(self, delta):
        """G restricted to the boundary as a function of the angle difference."""
        delta = np.asarray(delta, dtype=float)
        s = np.abs(np.sin(0.5 * self.period * delta))
        if np.any(s == 0.0):
            raise SingularPoint("boundary Green function evaluated at the source")
        A, T = self.parts(delta)
        return A * np.log(2.0 * s) + T

    def boundary_remainder(self, delta):
        """G(d) - A log|d| for |m d| <= pi; finite (and C^2) through d = 0."""
        m = self.period
        delta = np.asarray(delta, dtype=float)
        y = np.asarray(wrap_angle(m * delta), dtype=float)
        A, T = self.parts(delta)
        # log(2 sin(y/2)/|d|) = log m + log(sinc(y/2pi))
        return A * (np.log(np.sinc(y / TWO_PI)) + np.log(m)) + T

    def boundary_derivative(self, delta):
        """d/d(theta) of G(theta - theta_y), i.e. G'(delta)."""
        m = self.period
        delta = np.asarray(delta, dtype=float)
        s = np.sin(0.5 * m * delta)
        if np.any(s == 0.0):
            raise SingularPoint("tangential gradient evaluated at the source")
        A, T, dA, dT = self.parts(delta, derivative=True)
        return dA * np.log(2.0 * np.abs(s)) + A * 0.5 * m * np.cos(0.5 * m * delta) / s + dT

    def regular_boundary(self, delta):
        """G + (1/pi) log|x - y| along the boundary; equals S(d) for period 1."""
        delta = np.asarray(delta, dtype=float)
        s = np.abs(np.sin(0.5 * delta))
        sm = np.abs(np.sin(0.5 * self.period * delta))
        A, T = self.parts(delta)
        nz = s > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            lg = np.where(nz, A * np.log(2.0 * np.where(nz, sm, 1.0))
                          + np.log(2.0 * np.where(nz, s, 1.0)) / np.pi, 0.0)
        if self.period == 1:
            return lg + T
        return np.where(nz, lg, -np.log(self.period) / np.pi) + T

    def regular_boundary_derivative(self, delta):
        if self.period != 1:
            raise NotImplementedError("regular part derivative only for period 1")
        delta = np.asarray(delta, dtype=float)
        s = np.sin(0.5 * delta)
        A, T, dA, dT = self.parts(delta, derivative=True)
        nz = s != 0
        ss = np.where(nz, s, 1.0)
        lg = np.where(nz, dA * np.log(2.0 * np.abs(ss))
                      + (A + 1.0 / np.pi) * 0.5 * np.cos(0.5 * delta) / ss, 0.0)
        return lg + dT

    @property
    def smooth_part_table(self):
        """S sampled on the interpolation grid ``table_angles``."""
        return self.regular_boundary(self.table_angles / self.period)

    @property
    def robin(self):
        return self.robin_value

    def truncation_bound(self):
        """Bound on the neglected tail sum_{k > k_max} |d_k| / pi of the tabulated remainder."""
        n_modes = self.a.size
        k = np.arange(1, n_modes + 1, dtype=float)
        sel = (k > n_modes // 8) & (k <= n_modes // 4)
        p = len(self.beta) + 1
        c = float(np.max(np.abs(self.d[sel]) * k[sel] ** p))
        return c / ((p - 1) * n_modes ** (p - 1)) / np.pi

    def naive_truncation_bound(self):
        """Same bound for the unsubtracted series of (1/lambda_k - 1/k)."""
        return self.tail_constant() / (2.0 * self.a.size ** 2) / np.pi

    def tail_constant(self):
        """Fitted C in |1/lambda_k - 1/k| <= C/k^3 over the upper half of the modes."""
        k = np.arange(1, self.a.size + 1, dtype=float)
        sel = k > self.a.size // 2
        return float(np.max(np.abs(self.a[sel]) * k[sel] ** 3))


class GreenKernel(BoundaryKernel):
    """Boundary kernel (period 1) plus the interior regular part."""

    def __init__(self, k_max=K_MAX_DEFAULT, table_size=TABLE_SIZE):
        super().__init__(k_max, 1, table_size)
        self.g = self.spectrum.green_coefficients()

    # ---- interior --------------------------------------------------------
    def regular_modes(self, r, k_top=None, derivative=False):
        """Coefficients c_k(r) of H(x, y) = sum_k c_k(r) cos(k delta), |y| = 1.

        ``c_0 = g_0 I_0(r)/I_0(1)``, ``c_k = (I_k(r)/(lambda_k I_k(1)) - r^k/k)/pi``.
        With ``derivative=True`` also returns ``d c_k / dr``.
        """
        k_top = self.k_max if k_top is None else min(int(k_top), self.k_max)
        r = np.atleast_1d(np.asarray(r, dtype=float))
        val, der = scaled_bessel(r, k_top)
        k = np.arange(1, k_top + 1)
        with np.errstate(under="ignore", divide="ignore"):
            rk = np.where(r[:, None] > 0, np.power(r[:, None], k), 0.0)
            rk1 = np.where(r[:, None] > 0, np.power(r[:, None], k - 1.0), (k == 1).astype(float))
        c = np.empty((r.size, k_top + 1))
        c[:, 0] = self.g[0] * val[:, 0]
        c[:, 1:] = (val[:, 1:] / self.lam[1: k_top + 1] - rk / k) / np.pi
        if not derivative:
            return c
        dc = np.empty_like(c)
        dc[:, 0] = self.g[0] * der[:, 0]
        dc[:, 1:] = (der[:, 1:] / self.lam[1: k_top + 1] - rk1) / np.pi
        return c, dc

    def mode_count(self, r, eps=1e-17):
        """Modes needed for the interior regular-part series at radius r."""
        r = float(np.max(r))
        if r >= 1.0 - 1e-14:
            return self.k_max
        n = int(np.ceil(np.log(eps) / np.log(max(r, 1e-300)))) + 2
        return max(2, min(self.k_max, n))


@lru_cache(maxsize=4)
def kernel(k_max=K_MAX_DEFAULT):
    return GreenKernel(k_max)


@lru_cache(maxsize=8)
def periodic_kernel(period, k_max=K_MAX_DEFAULT):
    """Boundary trace of the m-fold periodised Green function (period 1 -> G_b)."""
    if period == 1:
        return kernel(k_max)
    return BoundaryKernel(k_max, period)


def _as_angle(p):
    return p.theta if isinstance(p, DiskBoundaryPoint) else float(p)


@dataclass(frozen=True)
class GreenEvaluator:
    """G(., y), H(., y) and tangential gradients for a fixed boundary source y."""

    source: DiskBoundaryPoint
    k_max: int = K_MAX_DEFAULT
    _kernel: GreenKernel = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.source, DiskBoundaryPoint):
            object.__setattr__(self, "source", DiskBoundaryPoint(self.source))
        if self._kernel is None:
            object.__setattr__(self, "_kernel", kernel(self.k_max))

    @property
    def kernel(self):
        return self._kernel

    @property
    def spectrum(self):
        return self._kernel.spectrum

    @property
    def smooth_part_table(self):
        return self._kernel.smooth_part_table

    def smooth_part(self, delta):
        return self._kernel.regular_boundary(delta)

    def boundary(self, theta):
        return self._kernel.boundary(np.asarray(theta) - self.source.theta)

    def __call__(self, x):
        return green_eval(x, self.source, self._kernel)

    def regular(self, x):
        return regular_part(x, self.source, self._kernel)

    def tangential_gradient(self, theta):
        return self._kernel.boundary_derivative(np.asarray(theta) - self.source.theta)


def _interior_regular(x, theta_y, kern):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    r = np.hypot(x[:, 0], x[:, 1])
    th = np.arctan2(x[:, 1], x[:, 0])
    out = np.empty(r.size)
    on = r >= 1.0
    if np.any(on):
        out[on] = kern.regular_boundary(th[on] - theta_y)
    inside = np.nonzero(~on)[0]
    if inside.size:
        kt = kern.mode_count(r[inside])
        c = kern.regular_modes(r[inside], kt)
        ang = np.cos(np.outer(th[inside] - theta_y, np.arange(kt + 1)))
        out[inside] = np.sum(c * ang, axis=1)
    return out, r, th


def green_eval(x, source, kern=None):
    """G(x, y) for points ``x`` in the closed disk and boundary source ``y``.

    ``x`` is a point or an (n, 2) array.  Interior points use
    ``-(1/pi) log|x - y| + H(x, y)`` with the uniformly convergent series
    for ``H``; on the boundary the log/smooth split is used.
    """
    kern = kernel() if kern is None else kern
    theta_y = _as_angle(source)
    scalar = np.ndim(x) == 1
    xa = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.array([np.cos(theta_y), np.sin(theta_y)])
    dist = np.hypot(xa[:, 0] - y[0], xa[:, 1] - y[1])
    if np.any(dist == 0.0):
        raise SingularPoint("green_eval at the source point")
    h, r, th = _interior_regular(xa, theta_y, kern)
    on = r >= 1.0
    out = -np.log(dist) / np.pi + h
    if np.any(on):
        out[on] = kern.boundary(th[on] - theta_y)
    return float(out[0]) if scalar else out


def regular_part(x, source, kern=None):
    """H(x, y) = G(x, y) - (1/pi) log(1/|x - y|)."""
    kern = kernel() if kern is None else kern
    theta_y = _as_angle(source)
    scalar = np.ndim(x) == 1
    h, _, _ = _interior_regular(x, theta_y, kern)
    return float(h[0]) if scalar else h


def robin(source=None, kern=None):
    """H(y, y); constant on the disk boundary."""
    kern = kernel() if kern is None else kern
    return kern.robin


def green_tangential_gradient(at, source, kern=None):
    kern = kernel() if kern is None else kern
    return kern.boundary_derivative(_as_angle(at) - _as_angle(source))


def robin_tangential_gradient(at, kern=None):
    """Tangential derivative of H(., y) at x = y; zero on the disk since S is even."""
    kern = kernel() if kern is None else kern
    return float(kern.regular_boundary_derivative(0.0))


def boundary_table(source, n, kern=None):
    """Columns (theta_eval, theta_src, G, H, robin) on n equispaced angles."""
    kern = kernel() if kern is None else kern
    theta_y = _as_angle(source)
    th = np.mod(theta_y + TWO_PI * (np.arange(n) + 0.5) / n, TWO_PI)
    g = kern.boundary(th - theta_y)
    h = kern.regular_boundary(th - theta_y)
    return th, np.full(n, theta_y), g, h, np.full(n, kern.robin)
