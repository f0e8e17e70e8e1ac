"""Shared branch runs.  The long continuations are computed once per session.

Set PEAKLAB_TEST_CACHE=<dir> to keep the branches as JSON between sessions
(handy while editing tests; leave unset for a clean run).
"""
import os
import time

import numpy as np
import pytest

from peaklab.solver import continuation, load_branch, save_branch

P_START, P_END, RATIO = 10.0, 300.0, 1.1

# wall time of each branch run, None when read from the cache
BRANCH_SECONDS = {}
# acceptance lines, echoed in the terminal summary
ACCEPTANCE = []


def _branch(name, **kw):
    cache = os.environ.get("PEAKLAB_TEST_CACHE")
    path = os.path.join(cache, f"{name}.json") if cache else None
    if path and os.path.exists(path):
        BRANCH_SECONDS[name] = None
        return load_branch(path)
    t0 = time.perf_counter()
    b = continuation(**kw)
    BRANCH_SECONDS[name] = time.perf_counter() - t0
    if path:
        save_branch(b, path)
    return b


@pytest.fixture(scope="session")
def branch_m1():
    return _branch("m1", p_start=P_START, p_end=P_END, step_ratio=RATIO, m=1)


@pytest.fixture(scope="session")
def branch_m2():
    return _branch("m2", p_start=P_START, p_end=P_END, step_ratio=RATIO, m=2)


@pytest.fixture(scope="session")
def branch_m3():
    return _branch("m3", p_start=P_START, p_end=P_END, step_ratio=RATIO, m=3)


@pytest.fixture(scope="session")
def constant_branch():
    return continuation(2.0, 50.0, 1.5, m=1, init="constant")


@pytest.fixture(scope="session")
def peak8():
    """One-peak solutions at p = 8 from both backends."""
    from peaklab.solver import make_initial_guess, newton_solve
    from peaklab.solver.continuation import continuation as cont
    nys = newton_solve(8.0, make_initial_guess(1, 8.0))
    spec = cont(8.0, 8.5, 1.1, m=1, backend="spectral")[0]
    return nys, spec


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
