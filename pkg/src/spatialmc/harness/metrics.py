import numpy as np

from ..errors import InvalidInputError


def mse_missing_entries(x_true, x_hat, mask) -> float:
    """Mean squared error over the entries NOT in ``mask``."""
    x_true = np.asarray(x_true, dtype=float)
    x_hat = np.asarray(x_hat, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    if x_true.shape != x_hat.shape or mask.shape != x_true.shape:
        raise InvalidInputError(f"shape mismatch: {x_true.shape}, {x_hat.shape}, {mask.shape}")
    hidden = ~mask
    if not hidden.any():
        raise InvalidInputError("no missing entries to score")
    return float(np.mean((x_true[hidden] - x_hat[hidden]) ** 2))


def mse_new_locations(x_true_new, predicted) -> float:
    """Mean squared error over every entry at the new locations."""
    a = np.asarray(x_true_new, dtype=float)
    b = np.asarray(predicted, dtype=float)
    if a.shape != b.shape:
        raise InvalidInputError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise InvalidInputError("no new-location entries to score")
    return float(np.mean((a - b) ** 2))


def column_mean_baseline(x_masked, n_new) -> np.ndarray:
    """Predict every new location by the observed column means."""
    means = np.nanmean(np.asarray(x_masked, dtype=float), axis=0)
    return np.tile(means, (n_new, 1))
