"""RTA specialization network: ratio index, binarization, degrees."""

from __future__ import annotations

import logging

import numpy as np

from .errors import EmptyNetworkError
from .matrices import SpecializationMatrix, WeightMatrix
from .validation import check_positive_margins

log = logging.getLogger(__name__)


def compute_rta(w: WeightMatrix) -> np.ndarray:
    """Revealed technological advantage ratio.

    RTA = (W_ct / sum_t W_ct) / (sum_c W_ct / sum_ct W_ct). Invariant under
    global rescaling of W. Zero rows/columns are a structural error here:
    pruning belongs upstream.
    """
    row, col = check_positive_margins(w.weights, w.actors, w.categories)
    total = w.total_weight()
    num = w.weights / row[:, None]
    den = col / total
    return num / den[None, :]


def binarize(
    rta: np.ndarray,
    actors,
    categories,
    threshold: float = 1.0,
) -> SpecializationMatrix:
    """Threshold RTA at `threshold` (closed inequality) into a binary network.

    Zero-degree actors and categories are pruned after thresholding and
    reported on the result; a network with no edges at all is an error.
    """
    if threshold <= 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    m = (np.asarray(rta, dtype=float) >= threshold).astype(np.int8)
    if m.sum() == 0:
        raise EmptyNetworkError("no RTA entry reaches the threshold")
    row_deg = m.sum(axis=1)
    col_deg = m.sum(axis=0)
    keep_a = np.flatnonzero(row_deg > 0)
    keep_c = np.flatnonzero(col_deg > 0)
    pruned_a = tuple(actors[i] for i in np.flatnonzero(row_deg == 0))
    pruned_c = tuple(categories[j] for j in np.flatnonzero(col_deg == 0))
    if pruned_a or pruned_c:
        log.debug("pruned %d actors, %d categories", len(pruned_a), len(pruned_c))
    sub = m[np.ix_(keep_a, keep_c)]
    return SpecializationMatrix(
        actors=tuple(actors[i] for i in keep_a),
        categories=tuple(categories[j] for j in keep_c),
        m=sub,
        k_c0=sub.sum(axis=1),
        k_t0=sub.sum(axis=0),
        pruned_actors=pruned_a,
        pruned_categories=pruned_c,
    )


def specialize(w: WeightMatrix, threshold: float = 1.0) -> SpecializationMatrix:
    """WeightMatrix straight to the pruned specialization network."""
    return binarize(compute_rta(w), w.actors, w.categories, threshold)


def degrees(m: SpecializationMatrix):
    """(diversity per actor, ubiquity per category) as integer row/column sums."""
    return m.m.sum(axis=1).astype(np.int64), m.m.sum(axis=0).astype(np.int64)
