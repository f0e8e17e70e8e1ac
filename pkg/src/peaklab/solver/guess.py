"""Seeds for peaked branches from the half-plane bubble."""
import numpy as np

from .mesh import BoundaryMesh
from .trace import BoundaryTrace

SEED_HEIGHT = np.sqrt(np.e)
BACKGROUND = 0.05


def bubble_boundary(t):
    """U(t, 0) = log(4/(t^2 + 4)), the bubble along the boundary line."""
    t = np.asarray(t, dtype=float)
    return np.log(4.0 / (t * t + 4.0))


def seed_width(p, height=SEED_HEIGHT):
    return 1.0 / (p * height ** (p - 1))


def make_initial_guess(m, p, mesh=None, height=SEED_HEIGHT):
    """m equispaced bumps M(1 + U(s/mu)/p), first peak at theta = 0.

    Without a mesh a graded one is built for the seed width mu.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if not p > 1:
        raise ValueError("p must exceed 1")
    mu = seed_width(p, height)
    if mesh is None:
        mesh = BoundaryMesh.graded(m, mu)
    if mesh.m != m:
        raise ValueError(f"mesh has symmetry {mesh.m}, expected {m}")
    s = mesh.fund_offsets
    u = np.maximum(height * (1.0 + bubble_boundary(s / mu) / p), BACKGROUND)
    return BoundaryTrace(u, mesh)
