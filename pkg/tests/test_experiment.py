import numpy as np
import pytest

from spatialmc.errors import InvalidInputError, SolverFailureError
from spatialmc.harness import experiment
from spatialmc.harness.experiment import (ExperimentReport, check_summary, default_workers, parse_grid,
                                          run_experiment, summarize)
from spatialmc.simulate import load_preset

SMALL = dict(grid_side=20, n_monitor=80, n_new=20)


def small(name="toy-C"):
    return load_preset(name).replace(**SMALL)


@pytest.fixture(scope="module")
def report():
    return run_experiment([small("toy-A"), small("toy-C")], [0.1, 0.3], 3, seed=4, workers=1, n_knots=5)


def test_parse_grid():
    assert parse_grid("0.05:0.40:0.05") == [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4]
    assert parse_grid("0.05:0.05:0.05") == [0.05]
    assert parse_grid("0.1,0.3") == [0.1, 0.3]
    for bad in ("a:b:c", "0.4:0.1:0.1", "0:1:0"):
        with pytest.raises(InvalidInputError):
            parse_grid(bad)


def test_default_workers(monkeypatch):
    monkeypatch.setenv(experiment.WORKERS_ENV, "3")
    assert default_workers() == 3
    monkeypatch.setenv(experiment.WORKERS_ENV, "x")
    with pytest.raises(InvalidInputError):
        default_workers()
    monkeypatch.delenv(experiment.WORKERS_ENV)
    assert default_workers() >= 1


def test_rows_and_order(report):
    rows = report.rows
    assert len(rows) == 2 * 2 * 2 * 3
    keys = [(r["preset"], r["mcar_level"], r["method"], r["replicate"]) for r in rows]
    assert keys == sorted(keys)
    assert all(r["status"] == "ok" for r in rows)
    for r in rows:
        assert r["mse_missing_entries"] >= 0 and r["attained_rank"] == 1
        assert np.isnan(r["mse_new_locations"]) == (r["method"] == "lrmc")


def test_summary_integrity(report):
    check_summary(report.rows, report.summary)
    cell = report.cell("toy-C", 0.3, "smc")
    vals = [r["mse_missing_entries"] for r in report.rows
            if (r["preset"], r["mcar_level"], r["method"]) == ("toy-C", 0.3, "smc")]
    assert cell["mse_missing_mean"] == pytest.approx(np.mean(vals), rel=1e-12)
    assert cell["mse_missing_sd"] == pytest.approx(np.std(vals, ddof=1), rel=1e-12)
    tampered = [dict(s) for s in report.summary]
    tampered[0]["mse_missing_mean"] += 1e-9
    with pytest.raises(AssertionError):
        check_summary(report.rows, tampered)


def test_deterministic_across_workers(report, tmp_path):
    again = run_experiment([small("toy-A"), small("toy-C")], [0.1, 0.3], 3, seed=4, workers=2, n_knots=5)
    a = report.write(tmp_path / "a", plot=True)
    b = again.write(tmp_path / "b", plot=True)
    assert [p.name for p in a] == ["replicates.csv", "summary.csv", "timings.csv", "toy-A.svg", "toy-C.svg"]
    for pa, pb in zip(a, b):
        if pa.name != "timings.csv":
            assert pa.read_bytes() == pb.read_bytes(), pa.name


def test_failures_recorded(monkeypatch):
    real = experiment.select_lambda_for_rank

    def flaky(x, mask, z, q, settings):
        if z is None:
            raise SolverFailureError("boom", iteration=3)
        return real(x, mask, z, q, settings)

    monkeypatch.setattr(experiment, "select_lambda_for_rank", flaky)
    rep = run_experiment([small()], [0.2], 2, workers=1, n_knots=4)
    lr = [r for r in rep.rows if r["method"] == "lrmc"]
    assert all(r["status"].startswith("failed: SolverFailureError") for r in lr)
    assert rep.failure_rate == 0.5
    cell = rep.cell(small().name, 0.2, "lrmc")
    assert cell["n_failed"] == 2 and cell["n_ok"] == 0 and np.isnan(cell["mse_missing_mean"])


def test_invalid_arguments():
    with pytest.raises(InvalidInputError):
        run_experiment([small()], [0.2], 1, methods=("pca",))
    with pytest.raises(InvalidInputError):
        run_experiment([small()], [0.2], 0)
    with pytest.raises(InvalidInputError):
        run_experiment([small()], [0.99], 1)


def test_summary_single_replicate():
    rows = [dict(preset="p", scenario="A", mcar_level=0.1, method="smc", replicate=0,
                 mse_missing_entries=0.5, mse_new_locations=0.7, mse_new_baseline=1.0, status="ok")]
    (rec,) = summarize(rows)
    assert rec["mse_missing_mean"] == 0.5 and np.isnan(rec["mse_missing_sd"])
    assert ExperimentReport(rows, [rec]).failure_rate == 0.0
