"""Spatial matrix completion.

Nuclear-norm completion with the low-rank estimate restricted to the column
space of a design matrix ``Z``:

    minimize over M   0.5 * ||P_obs(X - Z M)||_F^2 + lam * ||Z M||_*

Because the estimate ``W = Z M`` is a linear function of the design, it can
be evaluated at locations that have no observations at all.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import _prox
from .design import DesignMatrix
from .errors import InvalidInputError, RankUnreachableError
from .linalg import ColumnSpaceProjector, as_matrix, center_columns, numerical_rank, shrink
from .lrmc import CompletionFit, _resolve_settings, lrmc_objective, lrmc_solve, prepare
from .masking import fill_combine


@dataclass
class SmcFit(CompletionFit):
    """A :class:`CompletionFit` plus the design-side quantities.

    ``m_hat`` maps design columns to the centered low-rank estimate, so
    ``w_hat == z @ m_hat``. ``loadings``/``scores`` are the leading
    principal directions of ``x_hat``.
    """

    m_hat: np.ndarray = None
    loadings: np.ndarray = None
    scores: np.ndarray = None
    target_rank: int = 0
    projector: ColumnSpaceProjector = dataclasses.field(default=None, repr=False)


def _design_values(z, n):
    zv = z.values if isinstance(z, DesignMatrix) else z
    zv = as_matrix(zv, "design matrix")
    if zv.shape[0] != n:
        raise InvalidInputError(f"design matrix has {zv.shape[0]} rows, data has {n}")
    return zv


def _projector(z, n):
    zv = _design_values(z, n)
    proj = ColumnSpaceProjector(zv)
    if proj.rank == 0:
        raise InvalidInputError("design matrix has zero effective rank")
    return proj


def _finish(proj, x, mask, offsets, w, d, lam, iters, converged, trace, q=None):
    x_hat = fill_combine(x, w + offsets, mask)
    rank = numerical_rank(d)
    target = rank if q is None else q
    q_pc = min(target, numerical_rank(np.linalg.svd(x_hat - x_hat.mean(axis=0), compute_uv=False)))
    if q_pc:
        scores, loadings = extract_pc_scores(x_hat, q_pc)
    else:
        scores, loadings = np.zeros((x_hat.shape[0], 0)), np.zeros((x_hat.shape[1], 0))
    return SmcFit(
        w_hat=w, x_hat=x_hat, lam=float(lam), attained_rank=rank, iters=iters,
        converged=converged, offsets=offsets, mask=mask, singular_values=d,
        objective_trace=trace, m_hat=proj.coefficients(w), loadings=loadings,
        scores=scores, target_rank=target, projector=proj,
    )


def smc_objective(x, mask, z, m, lam) -> float:
    """``0.5 * ||P_obs(x) - P_obs(z m)||_F^2 + lam * ||z m||_*``.

    One half multiplies the residual only, for both the complete and the
    masked problem.
    """
    zv = np.asarray(z.values if isinstance(z, DesignMatrix) else z, dtype=float)
    return lrmc_objective(x, mask, zv @ np.asarray(m, dtype=float), lam)


def smc_closed_form(x, z, lam) -> SmcFit:
    """Complete-data solution: soft-thresholded SVD of the projected data.

    Requires a fully observed ``x``; columns are centered first.
    """
    x = as_matrix(x, "data")
    if lam < 0:
        raise InvalidInputError(f"lambda must be nonnegative, got {lam}")
    proj = _projector(z, x.shape[0])
    mask = np.ones(x.shape, dtype=bool)
    xc, offsets = center_columns(x, mask)
    us, d, vt = np.linalg.svd(proj.reduce(xc), full_matrices=False)
    d = shrink(d, lam)
    r = int(np.count_nonzero(d))
    w = (proj.basis @ (us[:, :r] * d[:r])) @ vt[:r]
    return _finish(proj, x, mask, offsets, w, d, lam, 0, True, None)


def smc_solve(x, mask=None, z=None, settings=None, *, lam=None, w0=None, projector=None) -> SmcFit:
    """Spatial matrix completion by proximal gradient.

    Each iteration fills unobserved entries from the current estimate,
    projects onto the column space of ``z`` and soft-thresholds singular
    values. Rows with no observed entries are allowed; they are estimated
    purely through the design.

    Parameters
    ----------
    x : array_like, shape (n, p)
        Entries outside ``mask`` are ignored and may be NaN.
    mask : array_like of bool, optional
        Defaults to the non-NaN entries of ``x``.
    z : DesignMatrix or array_like, shape (n, k)
    settings : SolverSettings or float, optional
    lam : float, optional
        Overrides ``settings.lam``.
    w0 : array_like, optional
        Warm start on the centered scale.
    projector : ColumnSpaceProjector, optional
        Precomputed projector for ``z`` (saves a QR per call).
    """
    if z is None:
        raise InvalidInputError("SMC requires a design matrix")
    s = _resolve_settings(settings, lam)
    x, mask, xc, offsets = prepare(x, mask)
    proj = projector if projector is not None else _projector(z, x.shape[0])
    res = _prox.run(xc, mask, s.lam, proj, max_iters=s.max_iters, rel_tol=s.rel_tol,
                    record_trace=s.record_trace, w0=w0)
    return _finish(proj, x, mask, offsets, res.w, res.d, s.lam, res.iters,
                   res.converged, res.trace)


def lambda_grid_top(x, mask=None, z=None) -> float:
    """Largest singular value of the (projected) zero-filled centered data.

    Any penalty at or above this value yields the zero estimate.
    """
    x, mask, xc, _ = prepare(x, mask)
    xo = np.where(mask, xc, 0.0)
    if z is not None:
        xo = _projector(z, x.shape[0]).reduce(xo)
    return float(np.linalg.norm(xo, 2)) if xo.size else 0.0


def select_lambda_for_rank(x, mask=None, z=None, q=1, settings=None, *, prefer="smallest"):
    """Grid search for a penalty whose fit has rank exactly ``q``.

    The grid is geometric from ``sigma`` down to ``settings.grid_lower *
    sigma`` (``settings.grid_size`` points) where ``sigma`` is
    :func:`lambda_grid_top`. Fits are warm-started down the path. The pair
    of grid points where the rank crosses the target is then refined with
    ``settings.grid_refine`` more points.

    Parameters
    ----------
    prefer : {"smallest", "largest"}
        Which end of the rank-``q`` interval to return. ``"smallest"``
        brackets the step from rank ``q`` to ``q + 1`` and returns the least
        shrunk rank-``q`` fit; ``"largest"`` brackets the step into rank
        ``q`` and returns the most regularized one.

    Returns
    -------
    lam : float
    fit : CompletionFit or SmcFit
        ``SmcFit`` when ``z`` is given.

    Raises
    ------
    RankUnreachableError
        If no evaluated penalty yields rank ``q``.
    """
    if prefer not in ("smallest", "largest"):
        raise InvalidInputError(f"prefer must be 'smallest' or 'largest', got {prefer!r}")
    s = _resolve_settings(settings, None)
    x, mask, xc, _ = prepare(x, mask)
    n, p = x.shape
    proj = None
    limit = min(n, p)
    if z is not None:
        proj = _projector(z, n)
        limit = min(p, proj.rank)
    if not 1 <= q <= limit:
        raise InvalidInputError(f"target rank must be in [1, {limit}], got {q}")

    def solve(lam, w0):
        if proj is None:
            return lrmc_solve(x, mask, s, lam=lam, w0=w0)
        return smc_solve(x, mask, z, s, lam=lam, w0=w0, projector=proj)

    top = lambda_grid_top(x, mask, z)
    seen = []
    if top <= 0:
        raise RankUnreachableError(f"data are identically zero; rank {q} unreachable", q, [0])
    grid = np.geomspace(top, s.grid_lower * top, s.grid_size)

    # Rank grows as lam decreases. The crossing of interest is the step
    # into rank >= q ("largest") or into rank > q ("smallest").
    def crossed(rank):
        return rank >= q if prefer == "largest" else rank > q

    prev = None
    bracket = None
    for lam in grid:
        fit = solve(lam, None if prev is None else prev.w_hat)
        seen.append(fit)
        if crossed(fit.attained_rank):
            if prev is not None:
                bracket = (prev, fit)
            break
        prev = fit

    if bracket is not None and s.grid_refine > 0:
        hi, lo = bracket
        inner = np.geomspace(hi.lam, lo.lam, s.grid_refine + 2)[1:-1]
        w = hi.w_hat
        for lam in inner:
            fit = solve(lam, w)
            seen.append(fit)
            w = fit.w_hat

    hits = [f for f in seen if f.attained_rank == q]
    if not hits:
        ranks = [f.attained_rank for f in seen]
        raise RankUnreachableError(
            f"no penalty on the grid gives rank {q}; attained ranks "
            f"{min(ranks)}..{max(ranks)}", q, ranks)
    pick = max if prefer == "largest" else min
    best = pick(hits, key=lambda f: f.lam)
    return best.lam, best


def predict_new_locations(fit: SmcFit, z_new) -> np.ndarray:
    """Predicted data at new locations: ``z_new @ m_hat`` plus column offsets.

    ``z_new`` must come from the same design recipe as the training design.
    """
    if not isinstance(fit, SmcFit) or fit.m_hat is None:
        raise InvalidInputError("prediction at new locations needs a spatial (SMC) fit")
    zv = np.asarray(z_new.values if isinstance(z_new, DesignMatrix) else z_new, dtype=float)
    if zv.ndim == 1:
        zv = zv[None, :]
    if zv.ndim != 2 or zv.shape[1] != fit.m_hat.shape[0]:
        raise InvalidInputError(
            f"new design has {zv.shape[-1]} columns, fit expects {fit.m_hat.shape[0]}")
    if not np.isfinite(zv).all():
        raise InvalidInputError("new design must be finite")
    return zv @ fit.m_hat + fit.offsets


def extract_pc_scores(x, q: int):
    """Leading ``q`` principal components of a complete matrix.

    ``x`` may also be a fit, in which case its ``x_hat`` is used. Columns
    are mean-centered, loadings are the first ``q`` right singular vectors
    and scores are the centered data times the loadings. Each loading is
    signed so its largest-magnitude entry is positive.

    Returns
    -------
    scores : ndarray, shape (n, q)
    loadings : ndarray, shape (p, q)
    """
    if isinstance(x, CompletionFit):
        x = x.x_hat
    x = as_matrix(x, "data")
    xc = x - x.mean(axis=0)
    _, d, vt = np.linalg.svd(xc, full_matrices=False)
    rank = numerical_rank(d)
    if not 1 <= q <= rank:
        raise InvalidInputError(f"q must be in [1, {rank}] (rank of centered data), got {q}")
    v = vt[:q].T
    idx = np.argmax(np.abs(v), axis=0)
    v = v * np.sign(v[idx, np.arange(q)])
    return xc @ v, v
