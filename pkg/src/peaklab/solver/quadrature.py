"""Gauss-Legendre panels and log-weighted product rules.

For a target at reference position ``a`` relative to a panel mapped to
[-1, 1], :func:`log_weights` returns ``v`` with

    int_{-1}^{1} log|a - x| g(x) dx  ~=  sum_j v_j g(x_j)

exact for polynomials g of degree < q.  The moments
``m_n(a) = int log|a - x| P_n(x) dx`` come from the second-kind functions
``R_n(a) = int P_n(x)/(a - x) dx`` through ``m_n = (R_{n+1} - R_{n-1})/(2n+1)``.
"""
from functools import lru_cache

import numpy as np
from scipy.special import eval_legendre, xlogy

# with geometric grading every node next to a peak sits at |a| ~ 2 from the
# larger panels; Gauss-16 is already exact to rounding there
NEAR_RADIUS = 1.5
_FORWARD_LIMIT = 1.036
_BACKWARD_PAD = 120


@lru_cache(maxsize=16)
def gauss_legendre(q):
    x, w = np.polynomial.legendre.leggauss(q)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=16)
def _projector(q):
    # maps nodal values to Legendre coefficients: c_n = (2n+1)/2 sum_j w_j P_n(x_j) g_j
    x, w = gauss_legendre(q)
    n = np.arange(q)
    P = eval_legendre(n[:, None], x[None, :])
    return (0.5 * (2 * n + 1))[:, None] * P * w[None, :]


def _second_kind(a, nmax):
    """R_n(a) for n = 0..nmax, shape (len(a), nmax+1); principal value inside."""
    a = np.asarray(a, dtype=float)
    out = np.empty(a.shape + (nmax + 1,))
    r0 = np.log(np.abs((a + 1.0) / (a - 1.0)))
    fwd = np.abs(a) < _FORWARD_LIMIT
    if np.any(fwd):
        af = a[fwd]
        R = np.empty(af.shape + (nmax + 1,))
        R[..., 0] = r0[fwd]
        if nmax >= 1:
            R[..., 1] = af * R[..., 0] - 2.0
        for n in range(1, nmax):
            R[..., n + 1] = ((2 * n + 1) * af * R[..., n] - n * R[..., n - 1]) / (n + 1)
        out[fwd] = R
    bwd = ~fwd
    if np.any(bwd):
        ab = a[bwd]
        top = nmax + _BACKWARD_PAD
        R = np.zeros(ab.shape + (nmax + 1,))
        hi = np.zeros_like(ab)
        mid = np.full_like(ab, 1e-300)
        # downward recurrence for the minimal solution, normalised by R_0
        for n in range(top, 0, -1):
            lo = ((2 * n + 1) * ab * mid - (n + 1) * hi) / n
            hi, mid = mid, lo
            if n - 1 <= nmax:
                R[..., n - 1] = lo
            big = np.abs(lo) > 1e250
            if np.any(big):
                s = np.where(big, 1e-250, 1.0)
                hi *= s
                mid *= s
                R *= s[..., None]
        out[bwd] = R * (r0[bwd] / R[..., 0])[..., None]
    return out


def log_moments(a, nmax):
    """m_n(a) = int_{-1}^{1} log|a - x| P_n(x) dx for n = 0..nmax."""
    a = np.atleast_1d(np.asarray(a, dtype=float)).copy()
    # the endpoint values are finite limits; nudge off the log singularity of R_0
    e = np.abs(np.abs(a) - 1.0)
    a = np.where(e < 1e-13, np.sign(a) * (1.0 + 2e-15), a)
    out = np.empty(a.shape + (nmax + 1,))
    out[..., 0] = xlogy(1.0 - a, np.abs(1.0 - a)) + xlogy(1.0 + a, np.abs(1.0 + a)) - 2.0
    if nmax >= 1:
        R = _second_kind(a, nmax + 1)
        n = np.arange(1, nmax + 1)
        out[..., 1:] = (R[..., 2:] - R[..., :-2]) / (2 * n + 1)
    return out


def abs_weights(a, q):
    """Product weights for |a - x| on the reference panel, shape (len(a), q).

    |a - x| g(x) is piecewise polynomial, so Gauss on [-1, a] and [a, 1]
    gives the moments exactly.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    x, w = gauss_legendre(q)
    n = np.arange(q)
    c = np.clip(a, -1.0, 1.0)
    mom = np.zeros(a.shape + (q,))
    for lo, hi in ((-1.0, c), (c, 1.0)):
        half = 0.5 * (hi - lo)
        y = (0.5 * (hi + lo))[..., None] + half[..., None] * x
        f = np.abs(a[..., None] - y) * (half[..., None] * w)
        p0, p1 = np.ones_like(y), y
        mom[..., 0] += f.sum(-1)
        if q > 1:
            mom[..., 1] += (p1 * f).sum(-1)
        for k in range(1, q - 1):
            p0, p1 = p1, ((2 * k + 1) * y * p1 - k * p0) / (k + 1)
            mom[..., k + 1] += (p1 * f).sum(-1)
    return mom @ _projector(q)


def log_weights(a, q):
    """Product weights for log|a - x| on the reference panel, shape (len(a), q)."""
    m = log_moments(a, q - 1)
    return m @ _projector(q)


@lru_cache(maxsize=16)
def _bary(q):
    x, _ = gauss_legendre(q)
    d = x[:, None] - x[None, :]
    np.fill_diagonal(d, 1.0)
    return 1.0 / d.prod(axis=1)


def lagrange_matrix(q, t):
    """Interpolation matrix from the q Gauss nodes to reference points t."""
    x, _ = gauss_legendre(q)
    lam = _bary(q)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    d = t[:, None] - x[None, :]
    hit = d == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        c = lam / d
        M = c / c.sum(axis=1, keepdims=True)
    rows = hit.any(axis=1)
    if np.any(rows):
        M[rows] = hit[rows].astype(float)
    return M
