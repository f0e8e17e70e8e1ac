"""Boundary-concentrating solutions of Delta u = u in the unit disk with
nonlinear Neumann data du/dnu = u^p."""
import os as _os

# PEAKLAB_THREADS caps BLAS threads when peaklab is imported before numpy;
# the CLI also applies it to pools that are already running
if _os.environ.get("PEAKLAB_THREADS", "").isdigit():
    for _v in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_v, _os.environ["PEAKLAB_THREADS"])

from . import errors, geometry, specfun, greenkernel, solver, asymptotics, phim  # noqa: E402
from .greenkernel import dtn_eigenvalue, kernel, steklov_lambda1  # noqa: E402
from .solver import continuation, load_branch, newton_solve, save_branch  # noqa: E402

__version__ = "0.1.0"
