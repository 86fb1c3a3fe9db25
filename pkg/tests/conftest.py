import numpy as np
import pytest

import spatialmc._prox as prox

TRACE_SLACK = 1e-10

# Every proximal solve in the session is run with a recorded objective
# trace and checked for monotonicity; violations are collected here.
TRACE_LOG = {"runs": 0, "violations": []}
ACCEPTANCE = {}


def trace_violation(trace, slack=TRACE_SLACK):
    """Largest increase between consecutive objective values, or None."""
    steps = np.diff(np.asarray(trace, dtype=float))
    worst = float(steps.max()) if steps.size else 0.0
    return worst if worst > slack else None


@pytest.fixture(autouse=True, scope="session")
def _monitor_objective_traces():
    original = prox.run

    def checked(*args, record_trace=False, **kwargs):
        res = original(*args, record_trace=True, **kwargs)
        TRACE_LOG["runs"] += 1
        bad = trace_violation(res.trace)
        if bad is not None:
            TRACE_LOG["violations"].append(bad)
        if not record_trace:
            res.trace = None
        return res

    mp = pytest.MonkeyPatch()
    mp.setattr(prox, "run", checked)
    yield
    mp.undo()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance():
    """Record ``(criterion, passed, detail)`` for the end-of-run summary."""

    def record(number, title, passed, detail=""):
        ACCEPTANCE[number] = (title, bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if TRACE_LOG["runs"]:
        terminalreporter.write_line(
            f"objective traces checked: {TRACE_LOG['runs']} solver runs, "
            f"{len(TRACE_LOG['violations'])} violations")
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(
            f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}" + (f" -- {detail}" if detail else ""))



def pytest_collection_modifyitems(items):
    # the session-wide trace audit has to see every other solver run first
    items.sort(key=lambda item: item.get_closest_marker("trace_audit") is not None)
