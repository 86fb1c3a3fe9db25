"""Command-line entry point: ``spatialmc complete|predict|simulate``.

Exit status is 0 on success, 2 for invalid input and 3 for solver failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from ..design import DesignMatrix, DesignRecipe, build_design_matrix, evaluate_design
from ..errors import InvalidInputError, SolverFailureError
from ..lrmc import SolverSettings, lrmc_solve
from ..simulate import SCENARIOS, load_config, load_preset, preset_names
from ..smc import SmcFit, predict_new_locations, select_lambda_for_rank, smc_solve
from . import io
from .experiment import MAX_FAILURE_RATE, METHODS, parse_grid, run_experiment
from .metrics import mse_missing_entries, mse_new_locations

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 2, 3

log = logging.getLogger("spatialmc")


class JsonFormatter(logging.Formatter):
    def format(self, record):
        return json.dumps({"level": record.levelname, "logger": record.name,
                           "message": record.getMessage()})


def _setup_logging(quiet, json_logs):
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JsonFormatter() if json_logs else logging.Formatter("%(levelname)s: %(message)s"))
    root = logging.getLogger("spatialmc")
    root.handlers[:] = [handler]
    root.setLevel(logging.WARNING if quiet else logging.INFO)
    root.propagate = False


def _read_data(path):
    x, names = io.read_matrix(path)
    empty = np.flatnonzero(np.isnan(x).all(axis=0))
    if empty.size:
        raise InvalidInputError(f"{path}: column '{names[empty[0]]}' has no observed entries")
    return x, names


def _design_from_args(args, n):
    if args.design:
        z, _ = io.read_matrix(args.design)
        if np.isnan(z).any():
            raise InvalidInputError(f"{args.design}: design matrix may not contain NA")
        if len(z) != n:
            raise InvalidInputError(f"{args.design}: {len(z)} rows, input has {n}")
        return DesignMatrix(z)
    coords = io.read_coords(args.coords)
    if len(coords) != n:
        raise InvalidInputError(f"{args.coords}: {len(coords)} rows, input has {n}")
    cov, cov_names = (None, None)
    if args.covariates:
        cov, cov_names = io.read_matrix(args.covariates)
        if np.isnan(cov).any():
            raise InvalidInputError(f"{args.covariates}: covariates may not contain NA")
    return build_design_matrix(coords, cov, cov_names, n_knots=args.knots,
                               include_linear_terms=not args.no_linear_terms)


def _new_design(recipe, coords_path, cov_path):
    coords = io.read_coords(coords_path)
    cov, cov_names = (None, None)
    if cov_path:
        cov, cov_names = io.read_matrix(cov_path)
    return evaluate_design(recipe, coords, cov, cov_names)


def _fit_metadata(fit, method, names, args):
    meta = {
        "method": method,
        "lambda": fit.lam,
        "attained_rank": fit.attained_rank,
        "target_rank": args.rank,
        "iters": fit.iters,
        "converged": fit.converged,
        "columns": names,
        "offsets": fit.offsets.tolist(),
    }
    if isinstance(fit, SmcFit):
        meta["m_hat"] = fit.m_hat.tolist()
        meta["loadings"] = fit.loadings.tolist()
    return meta


def cmd_complete(args):
    x, names = _read_data(args.input)
    mask = ~np.isnan(x)
    settings = SolverSettings(max_iters=args.max_iters, rel_tol=args.tol)
    z = None
    if args.predict and args.method != "smc":
        raise InvalidInputError("LRMC cannot predict at new locations; use --method smc")
    if args.method == "smc":
        if not (args.design or args.coords):
            raise InvalidInputError("--method smc needs --design or --coords")
        z = _design_from_args(args, len(x))
    if args.rank is not None:
        lam, fit = select_lambda_for_rank(x, mask, z, args.rank, settings)
    elif z is None:
        fit = lrmc_solve(x, mask, settings, lam=args.lam)
    else:
        fit = smc_solve(x, mask, z, settings, lam=args.lam)

    prefix = args.output
    io.write_matrix(f"{prefix}.imputed.csv", fit.x_hat, names)
    io.write_matrix(f"{prefix}.lowrank.csv", fit.lowrank, names)
    meta = _fit_metadata(fit, args.method, names, args)
    if z is not None:
        meta["design_columns"] = list(z.columns)
        meta["recipe"] = z.recipe.to_dict() if z.recipe is not None else None
    if args.truth:
        truth, _ = io.read_matrix(args.truth)
        meta["mse_missing_entries"] = mse_missing_entries(truth, fit.x_hat, mask) if (~mask).any() else None
    if args.predict:
        if z.recipe is None:
            raise InvalidInputError("--predict needs a design built from --coords")
        pred = predict_new_locations(fit, _new_design(z.recipe, args.predict, args.predict_covariates))
        io.write_matrix(f"{prefix}.predicted.csv", pred, names)
        if args.predict_truth:
            truth_new, _ = io.read_matrix(args.predict_truth)
            meta["mse_new_locations"] = mse_new_locations(truth_new, pred)
    io.write_json(f"{prefix}.fit.json", meta)
    log.info("wrote %s.{imputed,lowrank}.csv and %s.fit.json (lambda=%.6g, rank=%d, iters=%d)",
             prefix, prefix, fit.lam, fit.attained_rank, fit.iters)
    return EXIT_OK


def cmd_predict(args):
    meta = io.read_json(args.fit)
    if meta.get("method") != "smc" or not meta.get("recipe"):
        raise InvalidInputError(f"{args.fit}: prediction needs an SMC fit built from coordinates")
    recipe = DesignRecipe.from_dict(meta["recipe"])
    z_new = _new_design(recipe, args.coords, args.covariates)
    m_hat = np.asarray(meta["m_hat"], dtype=float)
    if z_new.shape[1] != m_hat.shape[0]:
        raise InvalidInputError(f"{args.fit}: design has {z_new.shape[1]} columns, fit expects {m_hat.shape[0]}")
    pred = z_new.values @ m_hat + np.asarray(meta["offsets"], dtype=float)
    io.write_matrix(args.output, pred, meta["columns"])
    log.info("wrote %s (%d locations)", args.output, len(pred))
    return EXIT_OK


def _configs(args):
    if args.config:
        return [load_config(p) for p in args.config]
    out = []
    for name in args.preset or []:
        if name in ("toy", "high"):
            out.extend(load_preset(f"{name}-{s}") for s in SCENARIOS)
        else:
            out.append(load_preset(name))
    if not out:
        raise InvalidInputError("give --preset or --config")
    return out


def cmd_simulate(args):
    configs = _configs(args)
    levels = parse_grid(args.mcar_grid)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    report = run_experiment(configs, levels, args.replicates, methods, seed=args.seed,
                            workers=args.workers, n_knots=args.knots)
    paths = report.write(args.output, plot=args.plot)
    for p in paths:
        log.info("wrote %s", p)
    if report.failure_rate > MAX_FAILURE_RATE:
        raise SolverFailureError(f"{report.failure_rate:.0%} of fits failed; see {paths[0]}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="spatialmc", description=__doc__.splitlines()[0])
    parser.add_argument("--quiet", action="store_true", help="only log warnings and errors")
    parser.add_argument("--json-logs", action="store_true", help="log one JSON object per line")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("complete", help="complete a data matrix with LRMC or SMC")
    p.add_argument("--input", required=True, help="matrix CSV; missing cells are NA")
    p.add_argument("--method", choices=METHODS, required=True)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--design", help="precomputed design matrix CSV")
    src.add_argument("--coords", help="s1,s2 coordinates of the input rows")
    p.add_argument("--covariates", help="covariate CSV aligned with --coords")
    p.add_argument("--knots", type=int, default=None, help="number of spline knots")
    p.add_argument("--no-linear-terms", action="store_true")
    reg = p.add_mutually_exclusive_group(required=True)
    reg.add_argument("--rank", type=int, help="target rank; the penalty is found by grid search")
    reg.add_argument("--lambda", dest="lam", type=float, help="nuclear-norm penalty")
    p.add_argument("--output", required=True, help="output path prefix")
    p.add_argument("--truth", help="complete matrix for scoring missing entries")
    p.add_argument("--predict", help="s1,s2 coordinates of new locations (SMC)")
    p.add_argument("--predict-covariates", help="covariates at the new locations")
    p.add_argument("--predict-truth", help="true data at the new locations, for scoring")
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-5)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("predict", help="apply a saved SMC fit at new locations")
    p.add_argument("--fit", required=True, help="<prefix>.fit.json from `complete`")
    p.add_argument("--coords", required=True)
    p.add_argument("--covariates")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("simulate", help="run seeded simulation sweeps")
    p.add_argument("--preset", action="append",
                   help=f"preset name, repeatable ({', '.join(preset_names())}, or toy/high)")
    p.add_argument("--config", action="append", help="scenario config JSON, repeatable")
    p.add_argument("--mcar-grid", default="0.05:0.40:0.05")
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--methods", default="lrmc,smc")
    p.add_argument("--seed", type=int, default=None, help="overrides each config's seed")
    p.add_argument("--knots", type=int, default=None)
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: $SPATIALMC_WORKERS or CPU count)")
    p.add_argument("--plot", action="store_true", help="write one SVG per preset")
    p.add_argument("--output", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.quiet, args.json_logs)
    try:
        return args.func(args)
    except InvalidInputError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except OSError as exc:
        log.error("%s: %s", getattr(exc, "filename", "") or "I/O error", exc.strerror or exc)
        return EXIT_INPUT
    except SolverFailureError as exc:
        log.error("solver failure: %s", exc)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
