"""Newton solvers for u = K[u^p] on the disk boundary, two backends, and
continuation in p."""
from .continuation import Branch, continuation, p_schedule
from .guess import bubble_boundary, make_initial_guess, seed_width
from .interior import interior_value
from .io import load_branch, save_branch, save_summary_csv
from .mesh import BoundaryMesh, Grading, UniformGrid
from .newton import NewtonOptions, Solution, newton_solve, residual
from .peaks import count_peaks, cyclic_maxima
from .trace import BoundaryTrace, operator_for, panel_interpolate, spectral_grid

__all__ = [
    "Branch", "BoundaryMesh", "BoundaryTrace", "Grading", "NewtonOptions", "Solution",
    "UniformGrid", "bubble_boundary", "continuation", "count_peaks", "cyclic_maxima",
    "interior_value", "load_branch", "make_initial_guess", "newton_solve", "operator_for",
    "p_schedule", "panel_interpolate", "residual", "save_branch", "save_summary_csv",
    "seed_width", "spectral_grid",
]
