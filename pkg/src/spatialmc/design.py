"""Design matrices from planar coordinates: linear trend, covariates and
thin-plate spline radial basis columns.

A :class:`DesignRecipe` records everything needed to rebuild the same
columns at new locations (knots, column order, standardization), so a fit
made on monitoring sites can be applied elsewhere.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import xlogy

from .errors import InvalidInputError

LINEAR_TERMS = ("const", "s1", "s2")


def as_coords(coords, name="coordinates") -> np.ndarray:
    c = np.asarray(coords, dtype=float)
    if c.ndim != 2 or c.shape[1] != 2:
        raise InvalidInputError(f"{name} must have shape (n, 2), got {c.shape}")
    if not np.isfinite(c).all():
        raise InvalidInputError(f"{name} must be finite")
    return c


def default_knot_count(n: int) -> int:
    """About one knot per 16 sites, between 1 and 50."""
    return int(min(50, max(1, n // 16)))


def choose_knots(coords, count: int) -> np.ndarray:
    """Pick ``count`` space-filling knots from ``coords``.

    Greedy farthest-point selection. The point nearest the centroid is the
    reference: with one knot it is the answer, otherwise the first knot is
    the point farthest from it and each further knot maximizes the distance
    to those already chosen. Ties go to the lowest index.
    """
    c = as_coords(coords)
    n = len(c)
    if not 1 <= count <= n:
        raise InvalidInputError(f"knot count must be in [1, {n}], got {count}")
    seed = int(np.argmin(((c - c.mean(axis=0)) ** 2).sum(axis=1)))
    if count == 1:
        return c[[seed]].copy()
    first = int(np.argmax(((c - c[seed]) ** 2).sum(axis=1)))
    order = [first]
    chosen = np.zeros(n, dtype=bool)
    chosen[first] = True
    dist = ((c - c[first]) ** 2).sum(axis=1)
    while len(order) < count:
        i = int(np.argmax(np.where(chosen, -np.inf, dist)))
        order.append(i)
        chosen[i] = True
        dist = np.minimum(dist, ((c - c[i]) ** 2).sum(axis=1))
    return c[order].copy()


def tps_kernel(r) -> np.ndarray:
    """``r**2 * log(r)`` with the continuous value 0 at ``r = 0``."""
    r2 = np.asarray(r, dtype=float) ** 2
    return 0.5 * xlogy(r2, r2)


def tps_basis(coords, knots) -> np.ndarray:
    """Matrix of ``eta(||s_i - kappa_j||)`` with ``eta(r) = r^2 log r``."""
    c = as_coords(coords)
    k = as_coords(knots, "knots")
    if len(k) == 0:
        raise InvalidInputError("at least one knot is required")
    r2 = cdist(c, k, "sqeuclidean")
    return 0.5 * xlogy(r2, r2)


@dataclass(frozen=True)
class DesignRecipe:
    """How to evaluate a design matrix at arbitrary locations.

    ``columns`` lists the retained column names in order. ``center`` and
    ``spread`` are aligned with ``columns``; the constant column has
    center 0 and spread 1.
    """

    covariate_names: tuple
    knots: np.ndarray
    include_linear_terms: bool
    columns: tuple
    center: np.ndarray
    spread: np.ndarray
    dropped: tuple = ()

    def __post_init__(self):
        if np.any(self.spread <= 0):
            raise InvalidInputError("scaling spreads must be positive")

    @property
    def n_columns(self) -> int:
        return len(self.columns)

    def to_dict(self) -> dict:
        return {
            "covariate_names": list(self.covariate_names),
            "knots": np.asarray(self.knots).tolist(),
            "include_linear_terms": self.include_linear_terms,
            "columns": list(self.columns),
            "center": np.asarray(self.center).tolist(),
            "spread": np.asarray(self.spread).tolist(),
            "dropped": list(self.dropped),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DesignRecipe":
        knots = np.asarray(d["knots"], dtype=float).reshape(-1, 2)
        return cls(
            covariate_names=tuple(d["covariate_names"]),
            knots=knots,
            include_linear_terms=bool(d["include_linear_terms"]),
            columns=tuple(d["columns"]),
            center=np.asarray(d["center"], dtype=float),
            spread=np.asarray(d["spread"], dtype=float),
            dropped=tuple(d.get("dropped", ())),
        )


@dataclass
class DesignMatrix:
    values: np.ndarray
    recipe: DesignRecipe | None = field(default=None, repr=False)

    @property
    def shape(self):
        return self.values.shape

    @property
    def columns(self):
        if self.recipe is None:
            return tuple(f"z{j}" for j in range(self.values.shape[1]))
        return self.recipe.columns

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def _covariate_block(covariates, names, n, expected=None):
    if covariates is None:
        cov = np.zeros((n, 0))
    else:
        cov = np.asarray(covariates, dtype=float)
        if cov.ndim == 1:
            cov = cov[:, None]
        if cov.ndim != 2 or cov.shape[0] != n:
            raise InvalidInputError(f"covariates must have {n} rows, got shape {cov.shape}")
        if not np.isfinite(cov).all():
            raise InvalidInputError("covariates must be finite")
    if names is None:
        names = tuple(f"cov{j}" for j in range(cov.shape[1]))
    names = tuple(str(s) for s in names)
    if len(names) != cov.shape[1]:
        raise InvalidInputError(f"{len(names)} covariate names for {cov.shape[1]} columns")
    if expected is None:
        return cov, names
    lookup = {nm: j for j, nm in enumerate(names)}
    missing = [nm for nm in expected if nm not in lookup]
    if missing:
        raise InvalidInputError(f"missing covariate column(s): {', '.join(missing)}")
    return cov[:, [lookup[nm] for nm in expected]], tuple(expected)


def _raw_columns(coords, cov, cov_names, knots, include_linear_terms):
    blocks, names = [], []
    n = len(coords)
    if include_linear_terms:
        blocks.append(np.column_stack([np.ones(n), coords]))
        names.extend(LINEAR_TERMS)
    blocks.append(cov)
    names.extend(cov_names)
    if len(knots):
        blocks.append(tps_basis(coords, knots))
        names.extend(f"tps{j}" for j in range(len(knots)))
    return np.column_stack(blocks) if blocks else np.zeros((n, 0)), names


def build_design_matrix(coords, covariates=None, covariate_names=None, *, knots=None,
                        n_knots=None, include_linear_terms=True) -> DesignMatrix:
    """Fit a recipe on training locations and return the design matrix.

    Parameters
    ----------
    coords : array_like, shape (n, 2)
    covariates : array_like, shape (n, c), optional
    covariate_names : sequence of str, optional
    knots : array_like, shape (m, 2), optional
        Explicit knots. Otherwise ``n_knots`` are chosen by
        :func:`choose_knots` (default :func:`default_knot_count`); pass
        ``n_knots=0`` for no spline columns.
    include_linear_terms : bool
        Prepend ``const, s1, s2`` columns.

    Non-constant columns are standardized to mean 0 and standard deviation
    1. Covariate or basis columns with zero spread are dropped with a
    warning and listed in ``recipe.dropped``.
    """
    c = as_coords(coords)
    n = len(c)
    cov, cov_names = _covariate_block(covariates, covariate_names, n)
    if knots is None:
        m = default_knot_count(n) if n_knots is None else int(n_knots)
        knots = choose_knots(c, m) if m > 0 else np.zeros((0, 2))
    else:
        knots = as_coords(knots, "knots")

    raw, names = _raw_columns(c, cov, cov_names, knots, include_linear_terms)
    center = raw.mean(axis=0)
    spread = raw.std(axis=0)
    keep, dropped = [], []
    for j, nm in enumerate(names):
        if nm == "const":
            center[j], spread[j] = 0.0, 1.0
            keep.append(j)
        elif spread[j] <= 1e-12 * max(1.0, abs(center[j])):
            dropped.append(nm)
        else:
            keep.append(j)
    if dropped:
        warnings.warn(f"dropping constant design column(s): {', '.join(dropped)}", stacklevel=2)
    recipe = DesignRecipe(
        covariate_names=cov_names,
        knots=knots,
        include_linear_terms=include_linear_terms,
        columns=tuple(names[j] for j in keep),
        center=center[keep],
        spread=spread[keep],
        dropped=tuple(dropped),
    )
    return evaluate_design(recipe, c, cov, cov_names)


def evaluate_design(recipe: DesignRecipe, coords, covariates=None, covariate_names=None) -> DesignMatrix:
    """Evaluate a fitted recipe at ``coords`` using its stored knots and scaling.

    Covariates are matched to the recipe by name; when ``covariate_names``
    is omitted they must already be in the recipe's order.
    """
    c = as_coords(coords)
    n = len(c)
    if covariate_names is None and covariates is not None:
        covariate_names = recipe.covariate_names
    if not recipe.covariate_names and covariates is None:
        cov, cov_names = np.zeros((n, 0)), ()
    else:
        if covariates is None:
            raise InvalidInputError(
                f"missing covariate column(s): {', '.join(recipe.covariate_names)}")
        cov, cov_names = _covariate_block(covariates, covariate_names, n, recipe.covariate_names)
    raw, names = _raw_columns(c, cov, cov_names, recipe.knots, recipe.include_linear_terms)
    index = {nm: j for j, nm in enumerate(names)}
    z = (raw[:, [index[nm] for nm in recipe.columns]] - recipe.center) / recipe.spread
    return DesignMatrix(z, recipe)
