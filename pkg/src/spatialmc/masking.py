"""Observation masks and the entrywise projections built on them.

A mask is a boolean array of the data's shape, True where an entry is
observed.
"""

import numpy as np

from .errors import InvalidInputError


def as_mask(mask, shape=None) -> np.ndarray:
    m = np.asarray(mask)
    if m.dtype != bool:
        raise InvalidInputError(f"mask must be boolean, got dtype {m.dtype}")
    if m.ndim != 2:
        raise InvalidInputError(f"mask must be 2-D, got shape {m.shape}")
    if shape is not None and m.shape != tuple(shape):
        raise InvalidInputError(f"mask shape {m.shape} does not match data shape {tuple(shape)}")
    return m


def mask_from_nan(x) -> np.ndarray:
    """Mask observing exactly the non-NaN entries of ``x``."""
    return ~np.isnan(np.asarray(x, dtype=float))


def mask_from_indices(shape, observed) -> np.ndarray:
    """Build a mask from an iterable of ``(row, col)`` pairs."""
    m = np.zeros(shape, dtype=bool)
    for i, j in observed:
        if not (0 <= i < shape[0] and 0 <= j < shape[1]):
            raise InvalidInputError(f"index ({i}, {j}) outside shape {shape}")
        m[i, j] = True
    return m


def project_observed(a, mask) -> np.ndarray:
    """Keep entries in the mask, zero the rest."""
    a = np.asarray(a, dtype=float)
    mask = as_mask(mask, a.shape)
    return np.where(mask, a, 0.0)


def project_unobserved(a, mask) -> np.ndarray:
    """Keep entries outside the mask, zero the rest."""
    a = np.asarray(a, dtype=float)
    mask = as_mask(mask, a.shape)
    return np.where(mask, 0.0, a)


def fill_combine(x, w, mask) -> np.ndarray:
    """Observed entries from ``x``, unobserved entries from ``w``."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    if x.shape != w.shape:
        raise InvalidInputError(f"shape mismatch: {x.shape} vs {w.shape}")
    mask = as_mask(mask, x.shape)
    return np.where(mask, x, w)
