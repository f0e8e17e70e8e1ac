"""Branch serialization: one JSON document per branch, one CSV summary."""
import json

import numpy as np

from ..errors import ConfigError
from ..fileio import write_csv, write_json
from .continuation import Branch
from .mesh import BoundaryMesh, UniformGrid
from .newton import Solution
from .peaks import count_peaks
from .trace import BoundaryTrace

FORMAT = "peaklab-branch"
VERSION = 1
SUMMARY_COLUMNS = ("p", "linf", "gamma_p", "p_energy", "mu_p", "n_peaks")


def record_summary(sol, tau=0.5):
    """Row of the branch summary CSV for one record."""
    return {"p": sol.p, "linf": sol.linf, "gamma_p": sol.gamma(),
            "p_energy": sol.p * sol.boundary_energy(), "mu_p": sol.mu,
            "n_peaks": count_peaks(sol.trace, tau)}


def _grid_dict(grid):
    kind = "mesh" if isinstance(grid, BoundaryMesh) else "uniform"
    return dict(kind=kind, **grid.to_dict())


def _grid_from(d):
    if d.get("kind") == "mesh":
        return BoundaryMesh.from_dict(d)
    if d.get("kind") == "uniform":
        return UniformGrid.from_dict(d)
    raise ConfigError(f"unknown grid kind {d.get('kind')!r}")


def branch_to_dict(branch, diagnostics=None):
    recs = []
    for i, s in enumerate(branch.records):
        g = s.grid
        nh = g.n_fund
        w = g.weights[nh: 2 * nh] if isinstance(g, BoundaryMesh) else g.weights[:nh]
        rec = {"p": s.p, "backend": s.backend, "grid": _grid_dict(g),
               "nodes": g.fund_offsets, "weights": w, "trace": s.trace.values,
               "residual_norm": s.residual_norm, "iterations": s.iterations}
        rec["diagnostics"] = diagnostics[i] if diagnostics is not None else record_summary(s)
        recs.append(rec)
    return {"format": FORMAT, "version": VERSION, "m": branch.m, "n_peaks": branch.n_peaks,
            "provenance": branch.provenance, "records": recs}


def save_branch(branch, path, diagnostics=None):
    write_json(path, branch_to_dict(branch, diagnostics))


def branch_from_dict(d):
    try:
        if d.get("format") != FORMAT:
            raise ConfigError("not a branch document")
        records = []
        for r in d["records"]:
            grid = _grid_from(r["grid"])
            vals = np.asarray(r["trace"], dtype=float)
            nodes = np.asarray(r["nodes"], dtype=float)
            if vals.shape != (grid.n_fund,) or nodes.shape != vals.shape:
                raise ConfigError("trace length does not match the grid")
            if np.max(np.abs(nodes - grid.fund_offsets)) > 1e-12:
                raise ConfigError("stored nodes do not match the grid")
            records.append(Solution(float(r["p"]), BoundaryTrace(vals, grid),
                                    float(r["residual_norm"]), int(r.get("iterations", 0))))
        if not records:
            raise ConfigError("branch has no records")
        return Branch(records, int(d["m"]), dict(d.get("provenance", {})), d.get("n_peaks"))
    except (KeyError, TypeError, AttributeError) as exc:
        raise ConfigError(f"malformed branch document: {exc!r}") from exc


def load_branch(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not text.strip():
        raise ConfigError(f"{path} is empty")
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(d, dict):
        raise ConfigError("branch document must be a JSON object")
    return branch_from_dict(d)


def save_summary_csv(branch, path, tau=0.5):
    rows = []
    for s in branch.records:
        r = record_summary(s, tau)
        rows.append([r[c] for c in SUMMARY_COLUMNS])
    write_csv(path, SUMMARY_COLUMNS, rows)
