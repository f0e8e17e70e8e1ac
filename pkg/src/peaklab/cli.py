"""Command line entry point: peaklab {branch, diagnose, green, phim}.

Exit codes: 0 success, 1 bad configuration or input, 2 branch broken or
refused (partial output written), 2 for an optimizer failure in phim.
"""
import argparse
import contextlib
import dataclasses
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from .errors import (BranchBroken, CoincidentPoints, CollapseDetected, ConfigError,
                     MaxIterations, OverlappingBalls, OutOfChart, StepRefused)
from .fileio import atomic_write_text, csv_text, write_csv

EXIT_OK, EXIT_CONFIG, EXIT_BROKEN = 0, 1, 2
TWO_PI_E = 2.0 * np.pi * np.e
CONJECTURE = "conjecture (reported, not asserted)"


@dataclass
class RunConfig:
    m: int = 1
    p_start: float = 10.0
    p_end: float = 300.0
    ratio: float = 1.1
    backend: str = "nystrom"
    init: str = "peak"
    k_max: int = 4096
    q: int = 16
    grading_ratio: float = 3.0
    newton_tol: float = 1e-10
    max_iter: int = 50
    out: str = "run"
    # diagnose
    branch: str = ""
    p: float = 0.0
    r: float = 0.3
    # green
    src: float = 0.0
    n: int = 512
    # phim
    phim_init: str = "perturbed:0.1"
    seed: int = 0
    step: float = 0.5
    tol: float = 1e-10
    phim_max_iter: int = 100_000

    def validate(self):
        checks = [
            (self.p_start > 1, "p_start must exceed 1"),
            (self.p_end > self.p_start, "p_end must exceed p_start"),
            (self.ratio > 1, "ratio must exceed 1"),
            (self.m >= 1, "m must be at least 1"),
            (self.newton_tol > 0 and self.tol > 0, "tolerances must be positive"),
            (self.max_iter >= 1 and self.phim_max_iter >= 1, "iteration limits must be positive"),
            (self.backend in ("nystrom", "spectral"), f"unknown backend {self.backend!r}"),
            (self.init in ("peak", "constant"), f"unknown init {self.init!r}"),
            (self.k_max >= 1, "k_max must be positive"),
            (self.q >= 2, "q must be at least 2"),
            (self.grading_ratio > 1, "grading_ratio must exceed 1"),
            (0 < self.r < 2, "r must lie in (0, 2)"),
            (self.n >= 1, "n must be positive"),
            (self.step > 0, "step must be positive"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        return self

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in dataclasses.fields(cls)}
        extra = set(d) - names
        if extra:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(extra))}")
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        kw = {}
        for k, v in d.items():
            t = types[k]
            try:
                if t is int and float(v) != int(float(v)):
                    raise ValueError
                kw[k] = t(float(v)) if t is int else t(v)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {k}: {v!r}") from exc
        return cls(**kw)


def _load_config_file(path):
    try:
        with open(path) as fh:
            d = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(d, dict):
        raise ConfigError("config file must hold a JSON object")
    return d


def build_config(args):
    """Defaults, then the config file, then explicit flags."""
    d = RunConfig().to_dict()
    if getattr(args, "config", None):
        d.update(_load_config_file(args.config))
    for k in RunConfig().to_dict():
        v = getattr(args, k, None)
        if v is not None:
            d[k] = v
    return RunConfig.from_dict(d).validate()


def limit_threads():
    """Cap BLAS pools already loaded by numpy at PEAKLAB_THREADS threads."""
    n = os.environ.get("PEAKLAB_THREADS")
    if not n:
        return None
    try:
        n = int(n)
    except ValueError:
        raise ConfigError("PEAKLAB_THREADS must be an integer")
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return None
    return threadpool_limits(limits=max(1, n))


def _say(*a):
    print(*a, file=sys.stderr, flush=True)


# ---- branch --------------------------------------------------------------------

def record_row(sol, n_peaks, r=0.3, profile=True):
    """Diagnostics row for one record; columns that do not apply are left empty."""
    from . import asymptotics as A
    from .solver.io import record_summary
    row = record_summary(sol)
    row["n_peaks"] = n_peaks
    peaks = A.detect_peaks(sol) if n_peaks else None
    ok = peaks is not None and len(peaks) == n_peaks
    try:
        w = A.weights(sol, peaks, r) if ok else None
    except OverlappingBalls:
        w = None
    for i in range(n_peaks):
        row[f"a_mass_{i}"] = w[i].a_mass if w else None
    for i in range(n_peaks):
        row[f"a_energy_{i}"] = w[i].a_energy if w else None
    row["bubble_error"] = None
    if ok and profile:
        try:
            row["bubble_error"] = A.rescaled_profile(sol, max(peaks, key=lambda pk: pk.height)).bubble_error
        except OutOfChart:
            pass
    row["far_field_error"] = None
    if w:
        try:
            row["far_field_error"] = A.far_field_compare(sol, w, peaks).relative
        except ValueError:
            pass
    row["bm_probe"] = A.brezis_merle_probe(sol, 2.5)
    return row


def write_branch_outputs(branch, out, r=0.3, profile=True):
    from .solver.io import record_summary, save_branch
    os.makedirs(out, exist_ok=True)
    n = branch.n_peaks or 0
    rows = [record_row(s, n, r, profile) for s in branch.records]
    save_branch(branch, os.path.join(out, "branch.json"),
                diagnostics=[record_summary(s) for s in branch.records])
    header = list(rows[0]) if rows else ["p"]
    write_csv(os.path.join(out, "diag.csv"), header, [[row[h] for h in header] for row in rows])
    return rows


def cmd_branch(cfg, profile=True):
    from .solver import NewtonOptions, continuation
    opts = NewtonOptions(newton_tol=cfg.newton_tol, max_iter=cfg.max_iter)

    def progress(s):
        _say(f"p = {s.p:.6g}  linf = {s.linf:.10f}  iterations = {s.iterations}")

    try:
        branch = continuation(cfg.p_start, cfg.p_end, cfg.ratio, cfg.m, opts, init=cfg.init,
                              backend=cfg.backend, k_max=cfg.k_max, q=cfg.q,
                              grading_ratio=cfg.grading_ratio, callback=progress)
    except (BranchBroken, StepRefused) as exc:
        _say(f"error: {exc}")
        if exc.branch is not None and len(exc.branch):
            write_branch_outputs(exc.branch, cfg.out, cfg.r, profile)
            _say(f"partial branch ({len(exc.branch)} records) written to {cfg.out}")
        return EXIT_BROKEN
    write_branch_outputs(branch, cfg.out, cfg.r, profile)
    _say(f"{len(branch)} records written to {cfg.out}")
    return EXIT_OK


# ---- diagnose ------------------------------------------------------------------

def summary_table(branch):
    from .asymptotics import SQRT_E, linf
    lines = [f"{'p':>10} {'linf':>14} {'|linf-sqrt(e)|':>15} {'p_energy':>14} {'|p_energy-2pi e|':>17}"]
    for s in branch:
        top = linf(s)
        pe = s.p * s.boundary_energy()
        lines.append(f"{s.p:10.4f} {top:14.10f} {abs(top - SQRT_E):15.3e} {pe:14.8f} {abs(pe - TWO_PI_E):17.3e}")
    lines.append(f"sqrt(e) = {SQRT_E:.10f} and 2 pi e = {TWO_PI_E:.10f}: {CONJECTURE}")
    return "\n".join(lines)


def cmd_diagnose(cfg):
    from . import asymptotics as A
    from .solver import load_branch
    if not cfg.branch:
        raise ConfigError("diagnose needs a branch file")
    branch = load_branch(cfg.branch)
    sol = branch.at(cfg.p) if cfg.p > 0 else branch[-1]
    out = cfg.out
    os.makedirs(out, exist_ok=True)
    peaks = A.detect_peaks(sol)
    print(summary_table(branch))
    if not len(peaks):
        _say(f"record p = {sol.p:g} has no peaks; only the summary is written")
        atomic_write_text(os.path.join(out, "summary.txt"), summary_table(branch) + "\n")
        return EXIT_OK
    prof = A.rescaled_profile(sol, max(peaks, key=lambda pk: pk.height))
    U = prof.bubble_values
    write_csv(os.path.join(out, "profile.csv"), ["t1", "t2", "z", "U", "diff"],
              [[t[0], t[1], z, b, z - b] for t, z, b in zip(prof.grid, prof.z_values, U)])
    w = A.weights(sol, peaks, cfg.r)
    write_csv(os.path.join(out, "weights.csv"),
              ["index", "angle", "r", "a_mass", "a_energy", "c1"],
              [[e.index, peaks[e.index].angle, e.r, e.a_mass, e.a_energy, e.c1] for e in w])
    th = A.far_angles(peaks)
    ff = A.far_field_compare(sol, w, peaks, th)
    from .greenkernel import kernel
    kern = kernel()
    v = sol.trace_at(th) / sol.gamma()
    model = sum(e.a_mass * kern.boundary(th - a) for e, a in zip(w, peaks.angles))
    write_csv(os.path.join(out, "farfield.csv"), ["theta", "v", "model", "diff"],
              [[t, a, b, a - b] for t, a, b in zip(th, v, model)])
    atomic_write_text(os.path.join(out, "summary.txt"), summary_table(branch) + "\n")
    print(f"record p = {sol.p:g}: bubble error {prof.bubble_error:.3e}, "
          f"far-field relative error {ff.relative:.3e}")
    print("weights: " + ", ".join(f"a_mass = {e.a_mass:.8f} a_energy = {e.a_energy:.8f}" for e in w))
    return EXIT_OK


# ---- green and phim ------------------------------------------------------------

def cmd_green(cfg):
    from .greenkernel import boundary_table
    cols = boundary_table(cfg.src, cfg.n)
    path = cfg.out if cfg.out.endswith(".csv") else os.path.join(cfg.out, "green.csv")
    write_csv(path, ["theta_eval", "theta_src", "G", "H", "robin"], zip(*cols))
    _say(f"{cfg.n} rows written to {path}")
    return EXIT_OK


def initial_angles(spec, m, seed=0):
    from .phim import equispaced, perturbed
    kind, _, arg = spec.partition(":")
    if kind == "perturbed":
        try:
            amp = float(arg) if arg else 0.1
        except ValueError:
            raise ConfigError(f"bad perturbation size {arg!r}")
        return perturbed(m, amp, seed)
    if kind == "equispaced":
        return equispaced(m)
    if kind == "coincident":
        return np.zeros(m)
    if kind == "angles":
        try:
            a = np.array([float(x) for x in arg.split(",")])
        except ValueError:
            raise ConfigError(f"bad angle list {arg!r}")
        if a.size != m:
            raise ConfigError(f"expected {m} angles, got {a.size}")
        return a
    raise ConfigError(f"unknown phim init {spec!r}")


def _trajectory_text(traj, m, footer):
    header = ["iteration"] + [f"theta_{i}" for i in range(m)] + ["phi", "residual"]
    rows = [[it, *a, phi, res] for it, a, phi, res in traj]
    return csv_text(header, rows) + "".join(f"# {k},{v}\n" for k, v in footer)


def cmd_phim(cfg):
    from .phim import PeakConfiguration, find_critical
    a0 = initial_angles(cfg.phim_init, cfg.m, cfg.seed)
    try:
        PeakConfiguration.at(a0)
    except CoincidentPoints as exc:
        raise ConfigError(f"initial configuration: {exc}")
    path = cfg.out if cfg.out.endswith(".csv") else os.path.join(cfg.out, "phim.csv")
    try:
        res = find_critical(a0, step=cfg.step, tol=cfg.tol, max_iter=cfg.phim_max_iter)
    except (CollapseDetected, MaxIterations) as exc:
        _say(f"error: {exc}")
        return EXIT_BROKEN
    c = res.config
    footer = [("final_residual", format(c.residual, ".17g")),
              ("final_phi", format(c.phi_value, ".17g")),
              ("final_angles", " ".join(format(x, ".17g") for x in c.angles))]
    atomic_write_text(path, _trajectory_text(res.trajectory, cfg.m, footer))
    print(f"m = {cfg.m}: {res.iterations} iterations, residual {c.residual:.3e}, phi {c.phi_value:.12f}")
    print("separations: " + " ".join(f"{s:.12f}" for s in c.separations()))
    return EXIT_OK


# ---- argument parsing ----------------------------------------------------------

def _common(sp):
    sp.add_argument("--config", help="JSON file with RunConfig fields (flags override)")
    sp.add_argument("--save-config", help="write the effective configuration here")
    sp.add_argument("--out", help="output directory (or CSV path for green/phim)")


def make_parser():
    ap = argparse.ArgumentParser(prog="peaklab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("branch", help="follow a solution branch in p")
    _common(b)
    b.add_argument("--m", type=int)
    b.add_argument("--p-start", dest="p_start", type=float)
    b.add_argument("--p-end", dest="p_end", type=float)
    b.add_argument("--ratio", type=float)
    b.add_argument("--backend", choices=["nystrom", "spectral"])
    b.add_argument("--init", choices=["peak", "constant"])
    b.add_argument("--k-max", dest="k_max", type=int)
    b.add_argument("--q", type=int, help="Gauss points per panel")
    b.add_argument("--grading-ratio", dest="grading_ratio", type=float)
    b.add_argument("--newton-tol", dest="newton_tol", type=float)
    b.add_argument("--max-iter", dest="max_iter", type=int)
    b.add_argument("--r", type=float, help="weight ball radius")
    b.add_argument("--no-profile", action="store_true", help="skip the bubble column")

    d = sub.add_parser("diagnose", help="asymptotic diagnostics of a stored branch")
    _common(d)
    d.add_argument("branch", nargs="?")
    d.add_argument("--p", type=float, help="record closest to this p (default: last)")
    d.add_argument("--r", type=float)

    g = sub.add_parser("green", help="boundary Green function table")
    _common(g)
    g.add_argument("--src", type=float)
    g.add_argument("--n", type=int)

    f = sub.add_parser("phim", help="critical points of the interaction energy")
    _common(f)
    f.add_argument("--m", type=int)
    f.add_argument("--init", dest="phim_init",
                   help="perturbed[:size] | equispaced | coincident | angles:a,b,...")
    f.add_argument("--seed", type=int)
    f.add_argument("--step", type=float)
    f.add_argument("--tol", type=float)
    f.add_argument("--max-iter", dest="phim_max_iter", type=int)
    return ap


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        if args.command == "green" and args.out is None and "out" not in _file_keys(args):
            cfg.out = "green.csv"
        if args.command == "phim" and args.out is None and "out" not in _file_keys(args):
            cfg.out = "phim.csv"
        if args.save_config:
            atomic_write_text(args.save_config, json.dumps(cfg.to_dict(), indent=1) + "\n")
        with _threads():
            if args.command == "branch":
                return cmd_branch(cfg, profile=not args.no_profile)
            if args.command == "diagnose":
                return cmd_diagnose(cfg)
            if args.command == "green":
                return cmd_green(cfg)
            return cmd_phim(cfg)
    except ConfigError as exc:
        _say(f"error: {exc}")
        return EXIT_CONFIG


def _file_keys(args):
    return set(_load_config_file(args.config)) if args.config else set()


def _threads():
    lim = limit_threads()
    return contextlib.nullcontext() if lim is None else lim


if __name__ == "__main__":
    sys.exit(main())
