"""Panel meshes on the unit circle with D_m symmetry built in.

The circle is cut into m sectors centred on the peak angles ``2 pi s/m``.
Each sector is symmetric about its centre: the positive half ``[0, pi/m]``
is partitioned into panels (geometrically graded towards 0 when a peak
width is given) and mirrored.  Nodes carry ``(sector, offset)`` with the
offset measured from the sector centre, so spacings of order 1e-60 next
to a peak keep full relative precision.
"""
from dataclasses import dataclass, field

import numpy as np

from ..geometry import TWO_PI
from .quadrature import gauss_legendre

Q_DEFAULT = 16
GRADING_RATIO = 3.0
H_MAX = np.pi / 8
MIN_PANEL = 1e-300


@dataclass(frozen=True)
class Grading:
    ratio: float = GRADING_RATIO
    h_min: float = None  # smallest panel next to each peak; None for no grading
    h_max: float = H_MAX


def half_edges(m, grading):
    """Panel edges of the half sector [0, pi/m]."""
    half = np.pi / m
    h_max = min(grading.h_max, half)
    if grading.h_min is None or grading.h_min >= h_max:
        n = int(np.ceil(half / h_max))
        return np.linspace(0.0, half, n + 1)
    edges = [0.0]
    ell = max(grading.h_min, MIN_PANEL)
    while ell < h_max and edges[-1] + ell * (1.0 + 1.0 / grading.ratio) < half:
        edges.append(edges[-1] + ell)
        ell *= grading.ratio
    rest = half - edges[-1]
    n = max(1, int(np.ceil(rest / min(ell, h_max))))
    tail = edges[-1] + rest * np.arange(1, n + 1) / n
    tail[-1] = half
    return np.concatenate([edges, tail])


@dataclass(frozen=True, eq=False)
class BoundaryMesh:
    """Symmetric panel mesh: m sectors, each the mirror image of ``edges``."""

    m: int
    edges: np.ndarray
    q: int = Q_DEFAULT
    grading: Grading = field(default_factory=Grading)

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=float)
        if e[0] != 0.0 or abs(e[-1] - np.pi / self.m) > 1e-14 or np.any(np.diff(e) <= 0):
            raise ValueError("edges must increase from 0 to pi/m")
        object.__setattr__(self, "edges", e)
        x, w = gauss_legendre(self.q)
        c = 0.5 * (e[1:] + e[:-1])
        h = 0.5 * np.diff(e)
        # positive half, then mirrored negative half in increasing-angle order
        pos_off = (c[:, None] + h[:, None] * x[None, :]).ravel()
        pos_w = (h[:, None] * w[None, :]).ravel()
        nh = pos_off.size
        sec_off = np.concatenate([-pos_off[::-1], pos_off])
        sec_w = np.concatenate([pos_w[::-1], pos_w])
        m = self.m
        object.__setattr__(self, "n_fund", nh)
        object.__setattr__(self, "sector", np.repeat(np.arange(m), 2 * nh))
        object.__setattr__(self, "offset", np.tile(sec_off, m))
        object.__setattr__(self, "weights", np.tile(sec_w, m))
        pc = np.concatenate([-c[::-1], c])
        ph = np.concatenate([h[::-1], h])
        object.__setattr__(self, "panel_sector", np.repeat(np.arange(m), pc.size))
        object.__setattr__(self, "panel_center", np.tile(pc, m))
        object.__setattr__(self, "panel_half", np.tile(ph, m))
        for name in ("sector", "offset", "weights", "panel_sector", "panel_center", "panel_half"):
            getattr(self, name).setflags(write=False)

    # ---- constructors ----------------------------------------------------
    @classmethod
    def uniform(cls, m=1, q=Q_DEFAULT, h_max=H_MAX):
        g = Grading(h_min=None, h_max=h_max)
        return cls(m, half_edges(m, g), q, g)

    @classmethod
    def graded(cls, m, mu, q=Q_DEFAULT, ratio=GRADING_RATIO, h_max=H_MAX):
        """Mesh whose innermost panel at each peak has length mu/10."""
        g = Grading(ratio=ratio, h_min=mu / 10.0, h_max=h_max)
        return cls(m, half_edges(m, g), q, g)

    def refined(self):
        """Every panel split in two (for residual certificates)."""
        e = self.edges
        mid = 0.5 * (e[1:] + e[:-1])
        new = np.empty(2 * e.size - 1)
        new[0::2] = e
        new[1::2] = mid
        return BoundaryMesh(self.m, new, self.q, self.grading)

    # ---- geometry --------------------------------------------------------
    @property
    def size(self):
        return self.offset.size

    @property
    def n_panels(self):
        return self.panel_center.size

    @property
    def centers(self):
        return TWO_PI * np.arange(self.m) / self.m

    @property
    def theta(self):
        return np.mod(TWO_PI * self.sector / self.m + self.offset, TWO_PI)

    @property
    def panel_lengths(self):
        return 2.0 * self.panel_half

    @property
    def panels(self):
        """(start, end) angles of every panel, unreduced (may leave [0, 2pi))."""
        base = TWO_PI * self.panel_sector / self.m + self.panel_center
        return np.stack([base - self.panel_half, base + self.panel_half], axis=1)

    @property
    def min_panel(self):
        return float(np.min(self.panel_half) * 2.0)

    @property
    def fundamental(self):
        """Indices of the fundamental nodes: sector 0, positive offsets."""
        nh = self.n_fund
        return np.arange(nh, 2 * nh)

    @property
    def fund_offsets(self):
        """Offsets of the fundamental nodes from the first peak, in (0, pi/m)."""
        nh = self.n_fund
        return self.offset[nh: 2 * nh]

    def expand(self, fund_values):
        """Symmetric full-mesh vector from values at the fundamental nodes."""
        f = np.asarray(fund_values)
        return np.tile(np.concatenate([f[::-1], f]), self.m)

    def fold(self, K):
        """Sum the columns of K over each symmetry orbit (full -> fundamental)."""
        nh = self.n_fund
        K = K.reshape(K.shape[:-1] + (self.m, 2 * nh))
        return (K[..., nh:] + K[..., :nh][..., ::-1]).sum(axis=-2)

    def integrate(self, values):
        return float(np.dot(self.weights, values))

    def panel_of(self, i):
        return i // self.q

    def node_panel(self):
        return np.arange(self.size) // self.q

    def to_dict(self):
        return {"m": self.m, "q": self.q, "edges": self.edges.tolist(),
                "grading": {"ratio": self.grading.ratio, "h_min": self.grading.h_min,
                            "h_max": self.grading.h_max}}

    @classmethod
    def from_dict(cls, d):
        g = d.get("grading", {})
        return cls(int(d["m"]), np.asarray(d["edges"], dtype=float), int(d["q"]),
                   Grading(g.get("ratio", GRADING_RATIO), g.get("h_min"), g.get("h_max", H_MAX)))


@dataclass(frozen=True, eq=False)
class UniformGrid:
    """Equispaced nodes 2 pi j/n for the Fourier backend, with D_m symmetry."""

    n: int
    m: int = 1

    def __post_init__(self):
        if self.n % (2 * self.m):
            raise ValueError("grid size must be a multiple of 2m")

    @property
    def size(self):
        return self.n

    @property
    def theta(self):
        return TWO_PI * np.arange(self.n) / self.n

    @property
    def weights(self):
        return np.full(self.n, TWO_PI / self.n)

    @property
    def n_fund(self):
        return self.n // (2 * self.m) + 1

    @property
    def fundamental(self):
        return np.arange(self.n_fund)

    @property
    def fund_offsets(self):
        return self.theta[: self.n_fund]

    def orbit_index(self):
        """Fundamental index of every grid node."""
        j = np.arange(self.n)
        r = np.mod(j, self.n // self.m)
        return np.minimum(r, self.n // self.m - r)

    def expand(self, fund_values):
        return np.asarray(fund_values)[self.orbit_index()]

    def integrate(self, values):
        return float(np.sum(values) * TWO_PI / self.n)

    def to_dict(self):
        return {"n": self.n, "m": self.m}

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["n"]), int(d["m"]))
