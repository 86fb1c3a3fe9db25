"""Nuclear-norm low-rank matrix completion (soft-impute style)."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from . import _prox
from .errors import InvalidInputError
from .linalg import as_matrix, center_columns, numerical_rank, soft_threshold_singular_values, svd
from .masking import as_mask, fill_combine, mask_from_nan


@dataclass(frozen=True)
class SolverSettings:
    """Controls for the proximal solvers and the penalty search.

    ``grid_size``, ``grid_refine`` and ``grid_lower`` only affect
    :func:`spatialmc.smc.select_lambda_for_rank`.
    """

    lam: float = 0.0
    max_iters: int = 500
    rel_tol: float = 1e-5
    record_trace: bool = False
    grid_size: int = 25
    grid_refine: int = 10
    grid_lower: float = 1e-3

    def __post_init__(self):
        if self.lam < 0:
            raise InvalidInputError(f"lambda must be nonnegative, got {self.lam}")
        if self.max_iters < 1:
            raise InvalidInputError("max_iters must be at least 1")
        if not self.rel_tol > 0:
            raise InvalidInputError("rel_tol must be positive")


@dataclass
class CompletionFit:
    """Result of a completion solve.

    ``w_hat`` is on the centered scale; ``x_hat`` and :attr:`lowrank` are
    on the data scale (offsets added back). Observed entries of ``x_hat``
    are copied from the input unchanged.
    """

    w_hat: np.ndarray
    x_hat: np.ndarray
    lam: float
    attained_rank: int
    iters: int
    converged: bool
    offsets: np.ndarray
    mask: np.ndarray
    singular_values: np.ndarray
    objective_trace: list | None = field(default=None, repr=False)

    @property
    def lowrank(self) -> np.ndarray:
        return self.w_hat + self.offsets


def _resolve_settings(settings, lam):
    if settings is None:
        settings = SolverSettings()
    elif not isinstance(settings, SolverSettings):
        settings = SolverSettings(lam=float(settings))
    if lam is not None:
        settings = dataclasses.replace(settings, lam=float(lam))
    return settings


def prepare(x, mask):
    """Validate data and mask and center columns on observed entries."""
    x = as_matrix(x, "data", allow_nan=True)
    mask = mask_from_nan(x) if mask is None else as_mask(mask, x.shape)
    if np.isnan(x[mask]).any():
        raise InvalidInputError("observed entries must be finite")
    xc, offsets = center_columns(x, mask)
    return x, mask, xc, offsets


def lrmc_objective(x, mask, w, lam) -> float:
    """``0.5 * ||P_obs(x) - P_obs(w)||_F^2 + lam * ||w||_*``.

    The penalty carries no factor of one half. Entries of ``x`` outside the
    mask are ignored, so they may be NaN.
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    if x.shape != w.shape:
        raise InvalidInputError(f"shape mismatch: {x.shape} vs {w.shape}")
    mask = as_mask(mask, x.shape)
    return _prox.objective(np.where(mask, x, 0.0), mask, w, lam)


def lrmc_closed_form(x, lam) -> CompletionFit:
    """Soft-thresholded SVD of the column-centered, fully observed ``x``."""
    x = as_matrix(x, "data")
    if lam < 0:
        raise InvalidInputError(f"lambda must be nonnegative, got {lam}")
    mask = np.ones(x.shape, dtype=bool)
    xc, offsets = center_columns(x, mask)
    f = svd(xc)
    w = soft_threshold_singular_values(f, lam)
    d = np.maximum(f.d - lam, 0.0)
    return CompletionFit(
        w_hat=w, x_hat=fill_combine(x, w + offsets, mask), lam=float(lam),
        attained_rank=numerical_rank(d), iters=0, converged=True,
        offsets=offsets, mask=mask, singular_values=d,
    )


def lrmc_solve(x, mask=None, settings=None, *, lam=None, w0=None) -> CompletionFit:
    """Complete ``x`` by proximal gradient on the masked nuclear-norm problem.

    Parameters
    ----------
    x : array_like, shape (n, p)
        Data. Entries outside ``mask`` are ignored and may be NaN.
    mask : array_like of bool, optional
        Observed entries. Defaults to the non-NaN entries of ``x``.
    settings : SolverSettings or float, optional
        A bare float is taken as the penalty.
    lam : float, optional
        Overrides ``settings.lam``.
    w0 : array_like, optional
        Warm start on the centered scale. Defaults to zeros.
    """
    s = _resolve_settings(settings, lam)
    x, mask, xc, offsets = prepare(x, mask)
    res = _prox.run(xc, mask, s.lam, None, max_iters=s.max_iters, rel_tol=s.rel_tol,
                    record_trace=s.record_trace, w0=w0)
    return CompletionFit(
        w_hat=res.w, x_hat=fill_combine(x, res.w + offsets, mask), lam=s.lam,
        attained_rank=numerical_rank(res.d), iters=res.iters, converged=res.converged,
        offsets=offsets, mask=mask, singular_values=res.d, objective_trace=res.trace,
    )
