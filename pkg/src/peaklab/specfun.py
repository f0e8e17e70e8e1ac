"""Modified Bessel functions of the first kind on [0, 1].

Small orders use the power series directly.  Larger orders use Miller's
downward recurrence in ratio form,

    r_k = I_k / I_{k-1} = 1 / (2k/x + r_{k+1}),

normalised by the series value of ``I_0``.  Working with ratios avoids the
overflow of the classical scaled recurrence; ``I_k(1)`` itself underflows
double precision near ``k = 150``, which is why :class:`BesselTable` keeps
logarithms and ratios alongside the plain values.
"""
import math

import numpy as np

from .errors import DomainError, ModeOverflow, SingularArgument

K_MAX_DEFAULT = 4096
SERIES_ORDER_MAX = 8
_MILLER_PAD = 40


def bessel_series(k, x, terms=40):
    """Power series sum_m (x/2)^(2m+k) / (m! (m+k)!); the reference oracle."""
    h = 0.5 * x
    if h == 0.0:
        return 1.0 if k == 0 else 0.0
    # leading term computed in log space so large k does not overflow k!
    lead = math.exp(k * math.log(h) - math.lgamma(k + 1))
    total = 0.0
    term = lead
    h2 = h * h
    for m in range(terms):
        total += term
        term *= h2 / ((m + 1) * (m + 1 + k))
        if term < 1e-18 * total:
            break
    return total


def bessel_ratios(x, k_top):
    """Ratios I_k(x)/I_{k-1}(x) for k = 1..k_top (index 0 unused, set to 1).

    ``x`` may be an array; the result then has shape ``x.shape + (k_top+1,)``.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape + (k_top + 1,))
    out[..., 0] = 1.0
    r = np.zeros_like(x)
    safe = np.where(x > 0, x, 1.0)
    for k in range(k_top + _MILLER_PAD, 0, -1):
        r = 1.0 / (2.0 * k / safe + r)
        if k <= k_top:
            out[..., k] = np.where(x > 0, r, 0.0)
    return out


def _check_x(x):
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"argument {x} outside [0, 1]")


def bessel_i(k, x, k_max=K_MAX_DEFAULT):
    """Return ``(I_k(x), I_k'(x))`` for integer 0 <= k <= k_max, 0 <= x <= 1."""
    k = int(k)
    x = float(x)
    _check_x(x)
    if k < 0:
        raise DomainError("order must be non-negative")
    if k > k_max:
        raise ModeOverflow(f"order {k} exceeds k_max={k_max}")
    if k <= SERIES_ORDER_MAX:
        vals = {j: bessel_series(j, x) for j in range(max(k - 1, 0), k + 2)}
    else:
        ratios = bessel_ratios(x, k + 1)
        i0 = bessel_series(0, x)
        # log-space product so the partial products never underflow early
        with np.errstate(divide="ignore"):
            logs = math.log(i0) + np.cumsum(np.log(ratios))
        vals = {j: float(np.exp(logs[j])) for j in (k - 1, k, k + 1)}
    value = vals[k]
    if k == 0:
        deriv = vals[1]
    else:
        deriv = 0.5 * (vals[k - 1] + vals[k + 1])
    return value, deriv


class BesselTable:
    """I_k and I_k' at a fixed argument for 0 <= k <= k_max.

    ``log_values`` and ``ratios`` are always finite and positive; ``values``
    is ``exp(log_values)`` and underflows to zero for large k.
    """

    def __init__(self, k_max=K_MAX_DEFAULT, x=1.0):
        if k_max < 1:
            raise ValueError("k_max must be >= 1")
        _check_x(x)
        if x == 0.0:
            raise DomainError("BesselTable needs x > 0")
        self.k_max = int(k_max)
        self.x = float(x)
        self.ratios = bessel_ratios(self.x, self.k_max + 2)
        i0 = bessel_series(0, self.x)
        self.log_values = math.log(i0) + np.cumsum(np.log(self.ratios))
        # use the series for the small orders so low modes are exact to rounding
        for j in range(min(SERIES_ORDER_MAX, self.k_max + 2) + 1):
            self.log_values[j] = math.log(bessel_series(j, self.x))
        self.values = np.exp(self.log_values[: self.k_max + 1])
        k = np.arange(self.k_max + 1)
        # I_k'/I_k = k/x + I_{k+1}/I_k, free of underflow
        self.log_derivative = k / self.x + self.ratios[1 : self.k_max + 2]
        self.derivatives = self.values * self.log_derivative

    def value(self, k):
        self._check(k)
        return float(self.values[k])

    def derivative(self, k):
        self._check(k)
        return float(self.derivatives[k])

    def _check(self, k):
        if k < 0 or k > self.k_max:
            raise ModeOverflow(f"order {k} outside [0, {self.k_max}]")


def scaled_bessel(r, k_top):
    """I_k(r)/I_k(1) and I_k'(r)/I_k(1) for k = 0..k_top, vectorised over ``r``.

    Returns arrays of shape ``r.shape + (k_top + 1,)``.  Entries that
    underflow are returned as zero.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any((r < 0) | (r > 1)):
        raise DomainError("radius outside [0, 1]")
    one = bessel_ratios(1.0, k_top + 1)
    rat = bessel_ratios(r, k_top + 1)
    i0r = np.array([bessel_series(0, ri) for ri in r])
    i0_1 = bessel_series(0, 1.0)
    with np.errstate(divide="ignore"):
        logq = np.log(i0r / i0_1)[:, None] + np.cumsum(np.log(rat[:, 1:]) - np.log(one[1:]), axis=1)
    val = np.empty((r.size, k_top + 2))
    val[:, 0] = i0r / i0_1
    val[:, 1:] = np.exp(logq)
    der = np.empty((r.size, k_top + 1))
    # I_0' = I_1 and I_k' = (I_{k-1} + I_{k+1})/2, rescaled by I_k(1)
    der[:, 0] = val[:, 1] * one[1]
    kk = np.arange(1, k_top + 1)
    der[:, 1:] = 0.5 * (val[:, kk - 1] / one[kk] + val[:, kk + 1] * one[kk + 1])
    return val[:, : k_top + 1], der


def fourier_log_sum(delta):
    """Closed form of sum_{k>=1} cos(k delta)/k = -log(2|sin(delta/2)|)."""
    delta = np.asarray(delta, dtype=float)
    s = np.abs(np.sin(0.5 * delta))
    if np.any(s == 0.0) or np.any(np.isclose(np.mod(delta, 2 * np.pi), 0.0, atol=1e-300)):
        raise SingularArgument("fourier_log_sum is singular at delta = 0 mod 2*pi")
    out = -np.log(2.0 * s)
    return float(out) if out.ndim == 0 else out
