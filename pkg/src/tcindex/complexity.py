"""Reflections, reduced stochastic matrix, and the eigenvector complexity index.

The binary network M gives alternating degree averages ("reflections").
Collapsing two reflection steps yields a row-stochastic category x category
matrix whose second eigenvector, standardized to mean 0 / population stdev 1,
is the complexity score. The same construction on the actor side gives a
per-actor index.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy.sparse import csgraph, csr_matrix

from .errors import (
    DegenerateSpectrumError,
    DisconnectedNetworkError,
    NonConvergenceError,
    StructuralError,
)
from .matrices import ComplexityResult, Diagnostics, ReflectionsState, SpecializationMatrix

log = logging.getLogger(__name__)

DENSE_LIMIT = 512
DEGENERACY_TOL = 1e-10
SIGN_CORR_TOL = 1e-6


def reflect(m: SpecializationMatrix, max_order: int) -> list:
    """Reflections states for orders 0..max_order.

    Order N averages the opposite side's order N-1 values over each node's
    neighbors; order 0 is the integer degrees.
    """
    if max_order < 1:
        raise ValueError(f"max_order must be >= 1, got {max_order}")
    if (m.k_c0 == 0).any() or (m.k_t0 == 0).any():
        raise StructuralError("zero-degree node; prune before reflecting")
    mat = m.m.astype(float)
    k_c = m.k_c0.astype(float)
    k_t = m.k_t0.astype(float)
    states = [ReflectionsState(0, k_c.copy(), k_t.copy())]
    for order in range(1, max_order + 1):
        prev = states[-1]
        k_c_n = (mat @ prev.k_t) / m.k_c0
        k_t_n = (mat.T @ prev.k_c) / m.k_t0
        states.append(ReflectionsState(order, k_c_n, k_t_n))
    return states


def _collapsed(mat: np.ndarray, own_deg: np.ndarray, other_deg: np.ndarray) -> np.ndarray:
    """Row-stochastic reduced matrix: sum over the other side of
    mat[., i] * mat[., j] / (other_deg * own_deg[i])."""
    s = (mat / other_deg[:, None]).T @ mat  # symmetric co-occurrence
    return s / own_deg[:, None]


def reduced_matrix(m: SpecializationMatrix) -> np.ndarray:
    """Category x category stochastic matrix from collapsing two reflections."""
    return _collapsed(m.m.astype(float), m.k_t0.astype(float), m.k_c0.astype(float))


def actor_reduced_matrix(m: SpecializationMatrix) -> np.ndarray:
    """Actor x actor counterpart (roles of the two sides swapped)."""
    return _collapsed(m.m.astype(float).T, m.k_c0.astype(float), m.k_t0.astype(float))


def bipartite_components(m: SpecializationMatrix):
    """Connected components of the bipartite graph.

    Returns (n_components, actor_labels, category_labels).
    """
    n_a, n_c = m.shape
    rows, cols = np.nonzero(m.m)
    adj = csr_matrix(
        (np.ones(rows.size), (rows, cols + n_a)), shape=(n_a + n_c, n_a + n_c)
    )
    n_comp, labels = csgraph.connected_components(adj, directed=False)
    return n_comp, labels[:n_a], labels[n_a:]


def standardize(v: np.ndarray) -> np.ndarray:
    """Mean 0, population standard deviation 1."""
    v = np.asarray(v, dtype=float)
    sd = v.std()  # population (ddof=0): a fixed finite vector, not a sample
    if sd < 1e-300 or not np.isfinite(sd):
        raise DegenerateSpectrumError("constant vector cannot be standardized")
    return (v - v.mean()) / sd


def scale_0_100(scores: np.ndarray) -> np.ndarray:
    """Affine map sending min -> 0 and max -> 100."""
    scores = np.asarray(scores, dtype=float)
    lo, hi = scores.min(), scores.max()
    if hi == lo:
        raise ValueError("cannot scale a constant vector to [0, 100]")
    # (hi-lo)/(hi-lo) is exactly 1.0, so the max lands exactly on 100
    return (scores - lo) / (hi - lo) * 100.0


def _second_eigenpair(stoch: np.ndarray, deg: np.ndarray, dense_limit=DENSE_LIMIT):
    """Second eigenpair of a reduced stochastic matrix.

    The matrix is diag(1/deg) @ S with S symmetric, so it is similar to the
    symmetric D^{-1/2} S D^{-1/2}; the spectrum is real and eigh applies.
    Returns (eigenvalue, right eigenvector, gap, iterations, residual).
    """
    n = stoch.shape[0]
    if n < 2:
        raise DegenerateSpectrumError("need at least two categories")
    d_sqrt = np.sqrt(deg.astype(float))
    sym = stoch * (d_sqrt[:, None] / d_sqrt[None, :])
    sym = 0.5 * (sym + sym.T)  # symmetrize away rounding noise

    if n <= dense_limit:
        vals, vecs = np.linalg.eigh(sym)
        order = np.argsort(vals)[::-1]
        vals = vals[order]
        vecs = vecs[:, order]
        lam2 = float(vals[1])
        if abs(vals[0] - lam2) < DEGENERACY_TOL:
            raise DegenerateSpectrumError(
                f"top eigenvalue repeated: {vals[0]:.12g} vs {lam2:.12g}"
            )
        gap = float(lam2 - vals[2]) if n > 2 else float(vals[0] - lam2)
        if n > 2 and abs(gap) < DEGENERACY_TOL:
            raise DegenerateSpectrumError(
                f"second eigenvalue not isolated: gap {gap:.3e}"
            )
        w2 = vecs[:, 1]
        vec = w2 / d_sqrt
        resid = float(np.max(np.abs(stoch @ vec - lam2 * vec)))
        return lam2, vec, gap, 0, resid

    return _second_eigenpair_power(sym, stoch, d_sqrt)


def _second_eigenpair_power(sym, stoch, d_sqrt, tol=1e-13, max_iter=100_000):
    """Shifted power iteration with the known top eigenvector deflated."""
    n = sym.shape[0]
    w1 = d_sqrt / np.linalg.norm(d_sqrt)
    rng = np.random.default_rng(0)
    v = rng.standard_normal(n)
    v -= w1 * (w1 @ v)
    v /= np.linalg.norm(v)
    lam = 0.0
    for it in range(1, max_iter + 1):
        # (sym + I) keeps the spectrum nonnegative; deflation zeroes w1's slot
        u = sym @ v + v
        u -= w1 * (w1 @ u)
        norm = np.linalg.norm(u)
        if norm < 1e-300:
            raise DegenerateSpectrumError("deflated operator annihilated the iterate")
        u /= norm
        lam = float(u @ (sym @ u))
        resid = float(np.linalg.norm(sym @ u - lam * u, ord=np.inf))
        if resid < tol:
            vec = u / d_sqrt
            # gap estimate from a second deflation step is skipped here;
            # callers on this path get the residual as quality signal
            gap = float("nan")
            r = float(np.max(np.abs(stoch @ vec - lam * vec)))
            return lam, vec, gap, it, r
        v = u
    raise NonConvergenceError(
        f"power iteration did not converge in {max_iter} iterations",
        residual=resid,
        iterations=max_iter,
    )


def _orient(scores: np.ndarray, first_reflection: np.ndarray, neg_degree: np.ndarray):
    """Deterministic sign fix: positive correlation with the first reflection,
    falling back to correlation against minus the degree when that is ~0."""
    r = _corr(scores, first_reflection)
    if abs(r) <= SIGN_CORR_TOL:
        r = _corr(scores, -neg_degree.astype(float))
    if r < 0:
        return -scores
    return scores


def _corr(x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.linalg.norm(xc) * np.linalg.norm(yc)
    if denom == 0:
        return 0.0
    return float(xc @ yc / denom)


def tci_eigen(
    m: SpecializationMatrix,
    largest_component: bool = False,
    dense_limit: int = DENSE_LIMIT,
) -> ComplexityResult:
    """Standardized second eigenvector of the reduced matrix, both sides.

    Disconnected networks are refused unless largest_component is set, in
    which case the computation runs on the largest component and the rest
    is reported absent.
    """
    absent_actors: tuple = ()
    absent_categories: tuple = ()
    n_comp, a_lab, c_lab = bipartite_components(m)
    if n_comp > 1:
        sizes = [int((a_lab == k).sum() + (c_lab == k).sum()) for k in range(n_comp)]
        if not largest_component:
            raise DisconnectedNetworkError(
                f"bipartite network has {n_comp} components (sizes {sizes}); "
                "pass largest_component=True to analyze the largest one",
                n_components=n_comp,
                component_sizes=sizes,
            )
        keep = int(np.argmax(sizes))
        absent_actors = tuple(
            a for a, lab in zip(m.actors, a_lab) if lab != keep
        )
        absent_categories = tuple(
            c for c, lab in zip(m.categories, c_lab) if lab != keep
        )
        m = m.submatrix(np.flatnonzero(a_lab == keep), np.flatnonzero(c_lab == keep))
        log.warning(
            "disconnected network: analyzing largest component "
            "(%d actors, %d categories)", *m.shape
        )

    states = reflect(m, 1)
    k_t1 = states[1].k_t
    k_c1 = states[1].k_c

    mt = reduced_matrix(m)
    lam2, vec, gap, iters, resid = _second_eigenpair(mt, m.k_t0, dense_limit)
    tci = _orient(standardize(vec), k_t1, m.k_t0)

    ma = actor_reduced_matrix(m)
    _, avec, _, _, _ = _second_eigenpair(ma, m.k_c0, dense_limit)
    actor_index = _orient(standardize(avec), k_c1, m.k_c0)

    return ComplexityResult(
        categories=m.categories,
        actors=m.actors,
        tci=tci,
        tci_scaled=scale_0_100(tci),
        ubiquity=m.k_t0.astype(float),
        avg_diversity=k_t1,
        actor_index=actor_index,
        diagnostics=Diagnostics(
            second_eigenvalue=lam2,
            spectral_gap=gap,
            iterations=iters,
            residual_norm=resid,
            component_count=n_comp,
        ),
        absent_categories=absent_categories,
        absent_actors=absent_actors,
    )


def tci_reflect_limit(
    m: SpecializationMatrix, tol: float = 1e-10, max_order: int = 10_000
) -> np.ndarray:
    """Limit of the standardized even-order category reflections.

    Power iteration on the reduced matrix with the uninformative all-ones
    eigenvector deflated (its left eigenvector is the degree distribution);
    stops when successive standardized vectors agree within tol in max norm.
    """
    n_comp, _, _ = bipartite_components(m)
    if n_comp > 1:
        raise DisconnectedNetworkError(
            f"bipartite network has {n_comp} components", n_components=n_comp
        )
    mt = reduced_matrix(m)
    deg = m.k_t0.astype(float)
    pi = deg / deg.sum()  # stationary distribution, left eigenvector of 1
    v = deg.copy()  # order-0 ubiquity
    v = v - (pi @ v)
    prev = None
    diff = None
    order = 0
    while order < max_order:
        v = mt @ v
        v -= pi @ v  # re-deflate the ones direction
        order += 2
        nrm = np.linalg.norm(v)
        if nrm < 1e-250:
            raise DegenerateSpectrumError(
                "reflections collapsed after deflation (rank-1 network)"
            )
        v /= nrm
        s = standardize(v)
        if prev is not None:
            if s @ prev < 0:  # eigenvalue may be negative: align before comparing
                s = -s
            diff = float(np.max(np.abs(s - prev)))
            if diff < tol:
                states = reflect(m, 1)
                return _orient(s, states[1].k_t, m.k_t0)
        prev = s
    raise NonConvergenceError(
        f"reflections did not converge within order {max_order}",
        residual=diff,
        iterations=max_order,
    )
