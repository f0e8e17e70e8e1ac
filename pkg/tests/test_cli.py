import csv
import json
import os

import numpy as np
import pytest

from peaklab import asymptotics as A
from peaklab.cli import EXIT_BROKEN, EXIT_CONFIG, EXIT_OK, RunConfig, main
from peaklab.errors import ConfigError
from peaklab.greenkernel import kernel
from peaklab.solver import load_branch


def read_rows(path):
    with open(path) as fh:
        return [r for r in csv.reader(l for l in fh if not l.startswith("#"))]


def test_green(tmp_path):
    out = tmp_path / "g.csv"
    assert main(["green", "--n", "64", "--src", "0.5", "--out", str(out)]) == EXIT_OK
    rows = read_rows(out)
    assert rows[0] == ["theta_eval", "theta_src", "G", "H", "robin"]
    assert len(rows) == 65
    robin = {float(r[4]) for r in rows[1:]}
    assert len(robin) == 1 and abs(robin.pop() - kernel().robin) < 1e-15


def test_phim(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["phim", "--m", "3", "--out", str(out)]) == EXIT_OK
    text = out.read_text().splitlines()
    foot = dict(l[2:].split(",", 1) for l in text if l.startswith("# "))
    assert float(foot["final_residual"]) <= 1e-10
    a = np.array([float(x) for x in foot["final_angles"].split()])
    assert np.allclose(np.diff(a), 2 * np.pi / 3, atol=1e-7)
    rows = read_rows(out)
    assert rows[0][:2] == ["iteration", "theta_0"] and rows[0][-1] == "residual"


def test_phim_failures(tmp_path):
    out = str(tmp_path / "p.csv")
    assert main(["phim", "--m", "3", "--init", "coincident", "--out", out]) == EXIT_CONFIG
    assert main(["phim", "--m", "3", "--init", "angles:0,1", "--out", out]) == EXIT_CONFIG
    assert main(["phim", "--m", "3", "--max-iter", "2", "--out", out]) == EXIT_BROKEN


def test_bad_config(tmp_path):
    out = str(tmp_path / "run")
    assert main(["branch", "--p-start", "0.5", "--out", out]) == EXIT_CONFIG
    assert main(["branch", "--p-start", "20", "--p-end", "10", "--out", out]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["branch", "--config", str(bad), "--out", out]) == EXIT_CONFIG
    bad.write_text(json.dumps({"colour": 3}))
    assert main(["branch", "--config", str(bad), "--out", out]) == EXIT_CONFIG
    assert main(["branch", "--config", str(tmp_path / "nope.json"), "--out", out]) == EXIT_CONFIG
    assert not os.path.exists(out)


def test_run_config_roundtrip():
    c = RunConfig(m=2, p_end=40.0)
    assert RunConfig.from_dict(c.to_dict()) == c
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"m": 1.5})
    with pytest.raises(ConfigError):
        RunConfig(ratio=1.0).validate()


def test_config_file_and_save(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 16, "src": 1.0}))
    saved = tmp_path / "saved.json"
    out = tmp_path / "g.csv"
    assert main(["green", "--config", str(cfg), "--n", "8", "--out", str(out),
                 "--save-config", str(saved)]) == EXIT_OK
    d = json.loads(saved.read_text())
    assert d["n"] == 8 and d["src"] == 1.0
    assert len(read_rows(out)) == 9


def test_diagnose_inputs(tmp_path):
    out = str(tmp_path / "d")
    assert main(["diagnose", "--out", out]) == EXIT_CONFIG
    assert main(["diagnose", str(tmp_path / "missing.json"), "--out", out]) == EXIT_CONFIG
    (tmp_path / "empty.json").write_text("")
    assert main(["diagnose", str(tmp_path / "empty.json"), "--out", out]) == EXIT_CONFIG
    (tmp_path / "junk.json").write_text(json.dumps({"records": "x"}))
    assert main(["diagnose", str(tmp_path / "junk.json"), "--out", out]) == EXIT_CONFIG


@pytest.fixture(scope="module")
def short_run(tmp_path_factory):
    base = tmp_path_factory.mktemp("cli")
    runs = []
    for name in ("a", "b"):
        out = base / name
        code = main(["branch", "--m", "2", "--p-start", "10", "--p-end", "13",
                     "--no-profile", "--out", str(out)])
        runs.append((code, out))
    return runs


def test_branch_and_diagnose(short_run, tmp_path):
    (code, out), _ = short_run
    assert code == EXIT_OK
    rows = read_rows(out / "diag.csv")
    head = rows[0]
    assert head[:2] == ["p", "linf"] and "a_mass_1" in head and "bm_probe" in head
    assert len(rows) - 1 == len(load_branch(out / "branch.json"))
    assert all(int(float(r[head.index("n_peaks")])) == 2 for r in rows[1:])
    d = tmp_path / "diag"
    assert main(["diagnose", str(out / "branch.json"), "--out", str(d)]) == EXIT_OK
    for f in ("profile.csv", "weights.csv", "farfield.csv", "summary.txt"):
        assert (d / f).exists()
    w = read_rows(d / "weights.csv")
    assert len(w) == 3 and abs(float(w[1][3]) - float(w[2][3])) < 1e-8
    assert "conjecture" in (d / "summary.txt").read_text()


def test_branch_deterministic(short_run):
    (_, a), (_, b) = short_run
    assert (a / "diag.csv").read_bytes() == (b / "diag.csv").read_bytes()


def test_json_roundtrip_diagnostics(short_run):
    from peaklab.solver import continuation
    (_, out), _ = short_run
    loaded = load_branch(out / "branch.json")
    fresh = continuation(10.0, 13.0, 1.1, m=2)
    for s, t in zip(fresh, loaded):
        a, b = A.diagnostics(s), A.diagnostics(t)
        assert abs(a.gamma_p - b.gamma_p) <= 1e-15 * a.gamma_p
        assert abs(a.p_energy - b.p_energy) <= 1e-15 * a.p_energy
        assert np.array_equal(s.trace.values, t.trace.values)
