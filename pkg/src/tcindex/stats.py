"""Correlation, rank, and Mann-Whitney utilities for the analyses."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.stats import rankdata

from .errors import UndefinedCorrelationError
from .validation import check_vector_pair

EXACT_MIN_N = 8          # below this, the normal approximation is replaced
EXACT_ENUM_CAP = 2_000_000  # max subsets to enumerate before falling back


def pearson(x, y) -> float:
    """Product-moment correlation; constant input is an error, not nan."""
    x, y = check_vector_pair(x, y)
    xc = x - x.mean()
    yc = y - y.mean()
    nx = np.linalg.norm(xc)
    ny = np.linalg.norm(yc)
    if nx == 0 or ny == 0:
        raise UndefinedCorrelationError("correlation of a constant vector is undefined")
    return float(xc @ yc / (nx * ny))


def spearman(x, y) -> float:
    """Pearson correlation of mid-ranks."""
    x, y = check_vector_pair(x, y)
    return pearson(rankdata(x, method="average"), rankdata(y, method="average"))


@dataclass(frozen=True)
class UTestResult:
    u: float                # U statistic for the first sample
    p_two_sided: float
    effect_gamma: float     # rank-biserial, 1 - 2U/(n1*n2)
    n1: int
    n2: int
    method: str             # "normal" or "exact"


def _u_from_ranks(pooled_ranks, idx_first, n1):
    r1 = float(np.sum(pooled_ranks[idx_first]))
    return r1 - n1 * (n1 + 1) / 2.0


def mann_whitney_u(a, b) -> UTestResult:
    """Mann-Whitney U with mid-ranks for ties.

    The two-sided p-value uses the tie-corrected normal approximation with
    continuity correction; when the smaller sample has fewer than
    EXACT_MIN_N observations the exact permutation distribution of U is
    enumerated instead.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    n1, n2 = a.size, b.size
    if n1 == 0 or n2 == 0:
        raise ValueError("both samples must be nonempty")
    pooled = np.concatenate([a, b])
    ranks = rankdata(pooled, method="average")
    u = _u_from_ranks(ranks, np.arange(n1), n1)
    gamma = 1.0 - 2.0 * u / (n1 * n2)

    n = n1 + n2
    mu = n1 * n2 / 2.0

    if min(n1, n2) < EXACT_MIN_N and math.comb(n, n1) <= EXACT_ENUM_CAP:
        # exact permutation null: every n1-subset of the pooled values
        target = abs(u - mu)
        hits = 0
        total = 0
        for idx in combinations(range(n), n1):
            u_perm = _u_from_ranks(ranks, np.array(idx), n1)
            if abs(u_perm - mu) >= target - 1e-12:
                hits += 1
            total += 1
        p = hits / total
        return UTestResult(u, min(p, 1.0), gamma, n1, n2, "exact")

    _, counts = np.unique(pooled, return_counts=True)
    tie_term = float(np.sum(counts**3 - counts))
    sigma2 = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if sigma2 <= 0:
        # all values tied: no evidence either way
        return UTestResult(u, 1.0, gamma, n1, n2, "normal")
    diff = u - mu
    cc = 0.5 if diff != 0 else 0.0  # continuity correction toward the mean
    z = (diff - math.copysign(cc, diff)) / math.sqrt(sigma2)
    p = math.erfc(abs(z) / math.sqrt(2.0))
    return UTestResult(u, min(p, 1.0), gamma, n1, n2, "normal")


def rank(scores: dict, descending: bool = True) -> dict:
    """Dense ranks (ties share a rank, next distinct value gets rank+1).

    Output is keyed in the input's sorted key order for determinism.
    """
    if not scores:
        raise ValueError("cannot rank an empty mapping")
    keys = sorted(scores)
    vals = [scores[k] for k in keys]
    distinct = sorted(set(vals), reverse=descending)
    level = {v: i + 1 for i, v in enumerate(distinct)}
    return {k: level[scores[k]] for k in keys}
