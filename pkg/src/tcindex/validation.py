"""Input validation helpers shared by the functional core and the estimators."""

import numpy as np

from .errors import StructuralError


def check_weight_array(X, name="X"):
    """Coerce to a 2-D float array of finite, nonnegative weights."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got ndim={arr.ndim}")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    if np.any(arr < 0):
        raise ValueError(f"{name} contains negative weights")
    return arr


def check_binary_matrix(X, name="X"):
    """Coerce to a 2-D {0,1} integer incidence matrix."""
    arr = np.asarray(X)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got ndim={arr.ndim}")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0/1 entries")
    return arr.astype(np.int8)


def check_positive_margins(weights, actors, categories):
    """Guard used by RTA: every row and column sum must be positive."""
    row = weights.sum(axis=1)
    col = weights.sum(axis=0)
    bad_row = np.flatnonzero(row <= 0)
    if bad_row.size:
        raise StructuralError(f"actor {actors[bad_row[0]]!r} has zero total weight")
    bad_col = np.flatnonzero(col <= 0)
    if bad_col.size:
        raise StructuralError(
            f"category {categories[bad_col[0]]!r} has zero total weight"
        )
    return row, col


def check_vector_pair(x, y, min_len=3):
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < min_len:
        raise ValueError(f"need at least {min_len} observations, got {x.size}")
    return x, y
