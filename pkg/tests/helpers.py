import numpy as np


def orthonormal(rng, n, k):
    q, _ = np.linalg.qr(rng.standard_normal((n, k)))
    return q


def centered_orthonormal(rng, n, k):
    """Orthonormal columns that are also orthogonal to the ones vector."""
    q, _ = np.linalg.qr(np.column_stack([np.ones(n), rng.standard_normal((n, k))]))
    return q[:, 1:]
