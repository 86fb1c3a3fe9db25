"""Proximal-gradient loop shared by LRMC and SMC.

Each step fills the unobserved entries from the current iterate, optionally
projects onto a design column space, and soft-thresholds the singular
values. With unit step size this is exact proximal gradient on
``0.5 * ||P_obs(X - W)||_F^2 + lam * ||W||_*`` (restricted to the column
space when a projector is given), so the objective never increases.
"""

from dataclasses import dataclass

import numpy as np

from .errors import SolverFailureError
from .linalg import shrink


@dataclass
class ProxResult:
    w: np.ndarray
    d: np.ndarray  # singular values of w, nonincreasing
    iters: int
    converged: bool
    trace: list | None


def _thresholded_step(filled, lam, projector, iteration):
    try:
        if projector is None:
            u, d, vt = np.linalg.svd(filled, full_matrices=False)
        else:
            us, d, vt = np.linalg.svd(projector.reduce(filled), full_matrices=False)
            u = projector.basis @ us
    except np.linalg.LinAlgError as exc:
        raise SolverFailureError(f"SVD failed at iteration {iteration}: {exc}", iteration) from exc
    d = shrink(d, lam)
    r = int(np.count_nonzero(d))
    return (u[:, :r] * d[:r]) @ vt[:r], d


def objective(xo, mask, w, lam, d=None):
    """``0.5 * ||P_obs(x - w)||^2 + lam * ||w||_*``; ``xo`` is zero-filled."""
    resid = np.where(mask, xo - w, 0.0)
    if d is None:
        d = np.linalg.svd(w, compute_uv=False) if w.size else np.zeros(0)
    return 0.5 * float(np.sum(resid * resid)) + lam * float(np.sum(d))


def run(xc, mask, lam, projector=None, *, max_iters=500, rel_tol=1e-5,
        record_trace=False, w0=None):
    xo = np.where(mask, xc, 0.0)
    if w0 is None:
        w = np.zeros_like(xo)
        d = np.zeros(min(xo.shape))
    else:
        w = np.array(w0, dtype=float)
        d = None
    trace = [objective(xo, mask, w, lam, d)] if record_trace else None

    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        filled = np.where(mask, xo, w)
        w_new, d = _thresholded_step(filled, lam, projector, it)
        if not np.isfinite(w_new).all():
            raise SolverFailureError(f"non-finite iterate at iteration {it}", it)
        delta = np.linalg.norm(w_new - w) / max(1.0, np.linalg.norm(w))
        w = w_new
        if record_trace:
            trace.append(objective(xo, mask, w, lam, d))
        if delta < rel_tol:
            converged = True
            break
    if d is None:
        d = np.linalg.svd(w, compute_uv=False)
    return ProxResult(w, d, it, converged, trace)
