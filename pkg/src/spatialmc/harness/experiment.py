"""Seeded simulation sweeps comparing LRMC and SMC.

Each replicate draws one dataset per scenario (sites, covariates, fields
and noise are shared across MCAR levels; masks are nested in the level)
and scores every method at every level. Replicates are independent jobs
seeded by ``(seed, replicate)``, so results do not depend on the worker
count or completion order.
"""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..design import build_design_matrix, evaluate_design
from ..errors import InvalidInputError, SpatialMCError
from ..lrmc import SolverSettings
from ..simulate import ScenarioConfig, gen_dataset
from ..smc import predict_new_locations, select_lambda_for_rank
from .io import write_records
from .metrics import column_mean_baseline, mse_missing_entries, mse_new_locations

log = logging.getLogger(__name__)

METHODS = ("lrmc", "smc")
WORKERS_ENV = "SPATIALMC_WORKERS"
MAX_FAILURE_RATE = 0.10

ROW_COLUMNS = ["preset", "scenario", "mcar_level", "method", "replicate",
               "mse_missing_entries", "mse_new_locations", "mse_new_baseline",
               "attained_rank", "lambda", "iters", "status"]
TIMING_COLUMNS = ["preset", "mcar_level", "method", "replicate", "wall_time"]
SUMMARY_COLUMNS = ["preset", "scenario", "mcar_level", "method", "n_ok", "n_failed",
                   "mse_missing_mean", "mse_missing_sd", "mse_new_mean", "mse_new_sd",
                   "mse_baseline_mean", "mse_baseline_sd"]
_SUMMARY_SOURCES = {"mse_missing": "mse_missing_entries", "mse_new": "mse_new_locations",
                    "mse_baseline": "mse_new_baseline"}


def parse_grid(text: str) -> list:
    """Parse ``"start:stop:step"`` (inclusive) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, step = (float(t) for t in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(round((stop - start) / step)) + 1
            return [round(start + i * step, 10) for i in range(n)]
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InvalidInputError(f"cannot parse MCAR grid {text!r}; use start:stop:step") from None


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InvalidInputError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _covariate_names(cfg):
    return [f"ro{j + 1}" for j in range(cfg.b_o.shape[0])]


def _fit_one(method, ds, cfg, settings, n_knots):
    if method == "lrmc":
        lam, fit = select_lambda_for_rank(ds.x_masked, ds.mask, None, cfg.q, settings)
        return fit, None
    names = _covariate_names(cfg)
    z = build_design_matrix(ds.monitor_coords, ds.r_o_monitor, names, n_knots=n_knots)
    lam, fit = select_lambda_for_rank(ds.x_masked, ds.mask, z, cfg.q, settings)
    z_new = evaluate_design(z.recipe, ds.new_coords, ds.r_o_new, names)
    return fit, predict_new_locations(fit, z_new)


def run_replicate(cfg: ScenarioConfig, levels, methods, seed, replicate, n_knots=None,
                  settings=None):
    """Score ``methods`` at every level for one replicate of ``cfg``.

    Returns ``(rows, timings)`` as lists of dicts.
    """
    settings = settings or SolverSettings()
    rows, timings = [], []
    entropy = np.random.SeedSequence([int(seed), int(replicate)])
    for level in levels:
        ds = gen_dataset(cfg.replace(mcar_level=level), seed=entropy)
        baseline = mse_new_locations(ds.x_new, column_mean_baseline(ds.x_masked, len(ds.x_new))) \
            if len(ds.x_new) else float("nan")
        for method in methods:
            row = dict(preset=cfg.name, scenario=cfg.scenario, mcar_level=float(level),
                       method=method, replicate=int(replicate),
                       mse_missing_entries=float("nan"), mse_new_locations=float("nan"),
                       mse_new_baseline=baseline, attained_rank=-1, iters=-1,
                       status="ok")
            row["lambda"] = float("nan")
            t0 = time.perf_counter()
            try:
                fit, pred = _fit_one(method, ds, cfg, settings, n_knots)
                if (~ds.mask).any():
                    row["mse_missing_entries"] = mse_missing_entries(ds.x_monitor, fit.x_hat, ds.mask)
                if pred is not None and len(pred):
                    row["mse_new_locations"] = mse_new_locations(ds.x_new, pred)
                row.update(attained_rank=fit.attained_rank, iters=fit.iters)
                row["lambda"] = fit.lam
            except SpatialMCError as exc:
                row["status"] = f"failed: {type(exc).__name__}: {exc}"
                log.warning("replicate %s %s level %s failed: %s", replicate, method, level, exc)
            timings.append(dict(preset=cfg.name, mcar_level=float(level), method=method,
                                replicate=int(replicate), wall_time=time.perf_counter() - t0))
            rows.append(row)
    return rows, timings


def _job(args):
    cfg_dict, levels, methods, seed, rep, n_knots, settings = args
    return run_replicate(ScenarioConfig.from_dict(cfg_dict), levels, methods, seed, rep,
                         n_knots, settings)


def _sort_key(r):
    return (r["preset"], r.get("scenario", ""), r["mcar_level"], r["method"], r["replicate"])


def summarize(rows) -> list:
    """Mean and sample SD per (preset, scenario, level, method), failures excluded."""
    groups = {}
    for r in rows:
        groups.setdefault((r["preset"], r["scenario"], r["mcar_level"], r["method"]), []).append(r)
    out = []
    for key in sorted(groups):
        members = groups[key]
        ok = [r for r in members if r["status"] == "ok"]
        rec = dict(zip(("preset", "scenario", "mcar_level", "method"), key))
        rec.update(n_ok=len(ok), n_failed=len(members) - len(ok))
        for short, col in _SUMMARY_SOURCES.items():
            vals = np.array([r[col] for r in ok], dtype=float)
            vals = vals[~np.isnan(vals)]
            rec[f"{short}_mean"] = float(vals.mean()) if vals.size else float("nan")
            rec[f"{short}_sd"] = float(vals.std(ddof=1)) if vals.size > 1 else float("nan")
        out.append(rec)
    return out


def check_summary(rows, summary, tol=1e-12) -> None:
    """Raise if ``summary`` differs from a recomputation over ``rows``."""
    fresh = summarize(rows)
    if len(fresh) != len(summary):
        raise AssertionError("summary row count does not match replicate rows")
    for a, b in zip(fresh, summary):
        for col in SUMMARY_COLUMNS:
            x, y = a[col], b[col]
            if isinstance(x, float):
                if np.isnan(x) and np.isnan(y):
                    continue
                if not abs(x - y) <= tol * max(1.0, abs(x)):
                    raise AssertionError(f"summary mismatch in {col}: {x} vs {y}")
            elif x != y:
                raise AssertionError(f"summary mismatch in {col}: {x} vs {y}")


@dataclass
class ExperimentReport:
    rows: list
    summary: list
    timings: list = field(default_factory=list)

    @property
    def failure_rate(self) -> float:
        if not self.rows:
            return 0.0
        return sum(r["status"] != "ok" for r in self.rows) / len(self.rows)

    def cell(self, preset, level, method) -> dict:
        for rec in self.summary:
            if rec["preset"] == preset and rec["mcar_level"] == level and rec["method"] == method:
                return rec
        raise KeyError((preset, level, method))

    def write(self, outdir, plot=False) -> list:
        """Write ``replicates.csv``, ``summary.csv``, ``timings.csv`` and optional SVGs."""
        check_summary(self.rows, self.summary)
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        paths = [outdir / "replicates.csv", outdir / "summary.csv", outdir / "timings.csv"]
        write_records(paths[0], self.rows, ROW_COLUMNS)
        write_records(paths[1], self.summary, SUMMARY_COLUMNS)
        write_records(paths[2], self.timings, TIMING_COLUMNS)
        if plot:
            from .plotting import plot_report

            paths.extend(plot_report(self.summary, outdir))
        return paths


def run_experiment(configs, levels, replicates, methods=METHODS, seed=None, workers=None,
                   n_knots=None, settings=None) -> ExperimentReport:
    """Run every config for ``replicates`` replicates at each MCAR level.

    ``seed`` defaults to each config's own seed.
    """
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise InvalidInputError(f"unknown method(s): {', '.join(sorted(unknown))}")
    if replicates < 1:
        raise InvalidInputError("need at least one replicate")
    for level in levels:
        if not 0 <= level <= 0.95:
            raise InvalidInputError(f"MCAR level {level} outside [0, 0.95]")
    workers = default_workers() if workers is None else max(1, int(workers))
    jobs = [(cfg.to_dict(), list(levels), tuple(methods), cfg.seed if seed is None else seed,
             rep, n_knots, settings) for cfg in configs for rep in range(replicates)]
    log.info("running %d replicate jobs on %d worker(s)", len(jobs), workers)
    if workers == 1 or len(jobs) == 1:
        results = [_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_job, jobs))
    rows = sorted((r for res in results for r in res[0]), key=_sort_key)
    timings = sorted((t for res in results for t in res[1]), key=_sort_key)
    return ExperimentReport(rows, summarize(rows), timings)
