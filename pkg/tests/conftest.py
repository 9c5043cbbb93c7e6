"""Suite-wide fixtures.

Every call into the INPMAT main loop is watched for threshold increases, so
the monotonicity check in the acceptance module covers the whole session.
Acceptance tests also report one pass/fail line each, printed at the end.
"""
import importlib

import numpy as np
import pytest

# the package re-exports the solver function under the submodule's name
inpmat_mod = importlib.import_module("nullproj.inpmat")

THRESHOLD_WATCH = {"runs": 0, "iterations": 0, "violations": []}
ACCEPTANCE = {}

_original_iterate = inpmat_mod._iterate


def _watched_iterate(Phi, y, cfg, stop_after=None):
    out = _original_iterate(Phi, y, cfg, stop_after)
    thr = out[2].thresholds
    THRESHOLD_WATCH["runs"] += 1
    THRESHOLD_WATCH["iterations"] += len(thr)
    for k in range(1, len(thr)):
        if thr[k] > thr[k - 1]:
            THRESHOLD_WATCH["violations"].append((Phi.shape, k, thr[k - 1], thr[k]))
    return out


def pytest_configure(config):
    inpmat_mod._iterate = _watched_iterate


def pytest_unconfigure(config):
    inpmat_mod._iterate = _original_iterate


def pytest_collection_modifyitems(session, config, items):
    # the suite-wide threshold check has to see every other run first
    last = [it for it in items if "suite_wide" in it.keywords]
    rest = [it for it in items if "suite_wide" not in it.keywords]
    items[:] = rest + last


@pytest.fixture
def report():
    """``report(criterion, passed, detail)`` records one acceptance line."""
    def _report(criterion, passed, detail=""):
        ACCEPTANCE[criterion] = (bool(passed), detail)
    return _report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k[1:])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{key}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    from nullproj.rng import make_rng
    return make_rng(12345)


def gaussian(m, n, seed):
    from nullproj.rng import make_rng
    return make_rng(seed).standard_normal((m, n)) / np.sqrt(m)
