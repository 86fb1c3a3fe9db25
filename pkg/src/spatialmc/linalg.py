"""Dense linear-algebra primitives shared by the completion solvers.

Matrices are plain 2-D float ``numpy`` arrays. Column labels, when needed,
travel alongside as a separate list of strings.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, SolverFailureError

# Relative cutoff for dropping near-dependent design columns.
DEPENDENCE_TOL = 1e-10


class SvdFactors(NamedTuple):
    """Thin SVD ``a = u @ diag(d) @ v.T`` with ``d`` nonincreasing."""

    u: np.ndarray
    d: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.d) @ self.v.T


def as_matrix(a, name="matrix", allow_nan=False) -> np.ndarray:
    """Return ``a`` as a 2-D float array, validating shape and finiteness."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {arr.shape}")
    if allow_nan:
        bad = np.isinf(arr)
    else:
        bad = ~np.isfinite(arr)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise InvalidInputError(f"{name} has a non-finite entry at ({i}, {j})")
    return arr


def svd(a, iteration=None) -> SvdFactors:
    """Thin SVD of a finite matrix.

    Raises SolverFailureError if LAPACK fails to converge; ``iteration`` is
    passed through so callers inside a loop can report where it happened.
    """
    a = as_matrix(a)
    try:
        u, d, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SolverFailureError(f"SVD did not converge: {exc}", iteration) from exc
    return SvdFactors(u, d, vt.T)


def shrink(d, lam) -> np.ndarray:
    """Soft-threshold a vector of singular values: ``max(d - lam, 0)``."""
    return np.maximum(np.asarray(d, dtype=float) - lam, 0.0)


def soft_threshold_singular_values(f: SvdFactors, lam: float) -> np.ndarray:
    """Return ``u @ diag((d - lam)_+) @ v.T``.

    This is the proximal operator of ``lam * ||.||_*`` evaluated at the
    matrix whose SVD is ``f``.
    """
    if lam < 0:
        raise InvalidInputError(f"lambda must be nonnegative, got {lam}")
    d = shrink(f.d, lam)
    keep = d > 0
    return (f.u[:, keep] * d[keep]) @ f.v[:, keep].T


def frobenius_norm(a) -> float:
    return float(np.linalg.norm(a, "fro"))


def nuclear_norm(a) -> float:
    """Sum of singular values."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False).sum())


def numerical_rank(d, rel=1e-8) -> int:
    """Count singular values above ``rel`` times the largest one."""
    d = np.asarray(d, dtype=float)
    if d.size == 0 or d[0] <= 0:
        return 0
    return int(np.count_nonzero(d > rel * d[0]))


class ColumnSpaceProjector:
    """Orthogonal projector onto the span of the columns of ``z``.

    Built from a column-pivoted QR factorization. Columns whose residual
    after orthogonalizing against the earlier pivots falls below
    ``DEPENDENCE_TOL * ||z||_F`` are treated as dependent and dropped, so
    the hat matrix ``z (z'z)^-1 z'`` is never formed explicitly.

    Attributes
    ----------
    basis : ndarray, shape (n, rank)
        Orthonormal basis ``Q`` of the retained column space.
    kept : ndarray of int
        Indices of the columns of ``z`` that span the range.
    """

    def __init__(self, z):
        z = as_matrix(z, "design matrix")
        n, k = z.shape
        if n == 0 or k == 0:
            raise InvalidInputError(f"design matrix must be non-empty, got shape {z.shape}")
        q, r, piv = scipy.linalg.qr(z, mode="economic", pivoting=True)
        scale = np.linalg.norm(z, "fro")
        diag = np.abs(np.diag(r))
        rank = int(np.count_nonzero(diag >= DEPENDENCE_TOL * scale)) if scale > 0 else 0
        self.shape = z.shape
        self.rank = rank
        self.basis = q[:, :rank]
        self.kept = np.sort(piv[:rank])
        self._piv = piv[:rank]
        self._r = r[:rank, :rank]

    def __call__(self, a) -> np.ndarray:
        return self.apply(a)

    def apply(self, a) -> np.ndarray:
        """Return ``H @ a`` computed as ``Q (Q' a)``."""
        q = self.basis
        return q @ (q.T @ a)

    def reduce(self, a) -> np.ndarray:
        """Coordinates ``Q' a`` of the projection in the retained basis."""
        return self.basis.T @ a

    def coefficients(self, w) -> np.ndarray:
        """Least-squares coefficients ``m`` with ``z @ m = H @ w``.

        Rows of ``m`` belonging to dropped columns are zero, which makes the
        solution unique.
        """
        w = np.asarray(w, dtype=float)
        m = np.zeros((self.shape[1],) + w.shape[1:])
        if self.rank:
            m[self._piv] = scipy.linalg.solve_triangular(self._r, self.basis.T @ w)
        return m

    def matrix(self) -> np.ndarray:
        """Dense ``n x n`` hat matrix; meant for tests and small problems."""
        return self.basis @ self.basis.T


def column_space_projector(z) -> ColumnSpaceProjector:
    return ColumnSpaceProjector(z)


def center_columns(a, mask):
    """Subtract the observed-entry mean from each column.

    Parameters
    ----------
    a : array_like, shape (n, p)
        Data; entries outside ``mask`` are ignored and returned unchanged
        (they may be NaN).
    mask : array_like of bool, shape (n, p)
        True where the entry is observed.

    Returns
    -------
    centered : ndarray
    offsets : ndarray, shape (p,)
    """
    a = as_matrix(a, allow_nan=True)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != a.shape:
        raise InvalidInputError(f"mask shape {mask.shape} does not match data shape {a.shape}")
    counts = mask.sum(axis=0)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise InvalidInputError(f"column {int(empty[0])} has no observed entries")
    if np.isnan(a[mask]).any():
        raise InvalidInputError("observed entries must be finite")
    offsets = np.where(mask, a, 0.0).sum(axis=0) / counts
    centered = np.where(mask, a - offsets, a)
    return centered, offsets
