"""Boundary local maxima of nodal traces (cyclic, with plateaus)."""
import numpy as np


def cyclic_maxima(values, margin=0.0):
    """Indices of strict local maxima of a cyclic sequence.

    Runs of exactly equal values count once (mirror nodes on either side of
    a symmetry axis); the returned index is the first node of the run.  A
    maximum must exceed both neighbouring runs by more than ``margin``.
    """
    v = np.asarray(values, dtype=float)
    n = v.size
    if n < 3 or np.all(v == v[0]):
        return np.array([], dtype=int)
    # start the scan just after a strict change so no run wraps around
    change = np.nonzero(v != np.roll(v, 1))[0]
    start = int(change[0])
    w = np.roll(v, -start)
    heads = np.concatenate([[0], np.nonzero(np.diff(w) != 0)[0] + 1])
    runs = w[heads]
    left = np.roll(runs, 1)
    right = np.roll(runs, -1)
    is_max = (runs - left > margin) & (runs - right > margin)
    return np.sort((heads[is_max] + start) % n)


def count_peaks(trace, tau=0.5, margin=1e-12):
    """Number of boundary local maxima at least tau times the largest one;
    rounding ripples below ``margin`` (constant traces) are not peaks."""
    v = trace.full
    idx = cyclic_maxima(v, margin)
    if idx.size == 0:
        return 0
    return int(np.sum(v[idx] >= tau * np.max(v)))
