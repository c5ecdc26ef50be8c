"""Core matrix containers for the actor-category pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class WeightMatrix:
    """Actor x category matrix of fractional patent weights.

    Each accepted patent contributes a total weight of exactly 1.0, split
    equally across its assignees (corporate level) or the distinct regions
    of its assignees (regional level). Actors and categories are kept in
    lexicographic order so runs are reproducible regardless of input order.
    """

    actors: tuple
    categories: tuple
    weights: np.ndarray
    meta: dict = field(default_factory=dict)
    actor_counts: Optional[np.ndarray] = None  # patents each actor appears on

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=float)
        if w.shape != (len(self.actors), len(self.categories)):
            raise ValueError(
                f"weights shape {w.shape} does not match "
                f"{len(self.actors)} actors x {len(self.categories)} categories"
            )
        object.__setattr__(self, "weights", _freeze(w))
        if self.actor_counts is not None:
            c = np.ascontiguousarray(self.actor_counts, dtype=float)
            object.__setattr__(self, "actor_counts", _freeze(c))

    @property
    def shape(self):
        return self.weights.shape

    def total_weight(self) -> float:
        return float(self.weights.sum())

    def row_sums(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    def col_sums(self) -> np.ndarray:
        return self.weights.sum(axis=0)

    def restrict_actors(self, keep_idx, extra_meta=None) -> "WeightMatrix":
        """Keep the given actor rows, then drop categories left with zero weight."""
        keep_idx = np.asarray(keep_idx, dtype=int)
        sub = self.weights[keep_idx, :]
        col_keep = np.flatnonzero(sub.sum(axis=0) > 0)
        meta = dict(self.meta)
        if extra_meta:
            meta.update(extra_meta)
        counts = None
        if self.actor_counts is not None:
            counts = self.actor_counts[keep_idx]
        return WeightMatrix(
            actors=tuple(self.actors[i] for i in keep_idx),
            categories=tuple(self.categories[j] for j in col_keep),
            weights=sub[:, col_keep],
            meta=meta,
            actor_counts=counts,
        )

    def to_long(self):
        """Yield (actor, category, weight) triples for nonzero entries."""
        rows, cols = np.nonzero(self.weights)
        for i, j in zip(rows.tolist(), cols.tolist()):
            yield self.actors[i], self.categories[j], float(self.weights[i, j])


@dataclass(frozen=True)
class SpecializationMatrix:
    """Binary incidence M with cached degrees.

    k_c0 is per-actor diversity (row sums), k_t0 per-category ubiquity
    (column sums). After construction every row and column has degree >= 1;
    the pruned identifiers are kept for reporting.
    """

    actors: tuple
    categories: tuple
    m: np.ndarray
    k_c0: np.ndarray
    k_t0: np.ndarray
    pruned_actors: tuple = ()
    pruned_categories: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "m", _freeze(np.ascontiguousarray(self.m, dtype=np.int8)))
        object.__setattr__(self, "k_c0", _freeze(np.ascontiguousarray(self.k_c0, dtype=np.int64)))
        object.__setattr__(self, "k_t0", _freeze(np.ascontiguousarray(self.k_t0, dtype=np.int64)))

    @property
    def shape(self):
        return self.m.shape

    def submatrix(self, actor_idx, category_idx) -> "SpecializationMatrix":
        actor_idx = np.asarray(actor_idx, dtype=int)
        category_idx = np.asarray(category_idx, dtype=int)
        sub = self.m[np.ix_(actor_idx, category_idx)]
        return SpecializationMatrix(
            actors=tuple(self.actors[i] for i in actor_idx),
            categories=tuple(self.categories[j] for j in category_idx),
            m=sub,
            k_c0=sub.sum(axis=1),
            k_t0=sub.sum(axis=0),
            pruned_actors=self.pruned_actors,
            pruned_categories=self.pruned_categories,
        )


@dataclass(frozen=True)
class ReflectionsState:
    """One order of the alternating diversity/ubiquity averaging."""

    order: int
    k_c: np.ndarray
    k_t: np.ndarray


@dataclass(frozen=True)
class Diagnostics:
    second_eigenvalue: float
    spectral_gap: float
    iterations: int
    residual_norm: float
    component_count: int

    def as_dict(self):
        return {
            "second_eigenvalue": self.second_eigenvalue,
            "spectral_gap": self.spectral_gap,
            "iterations": self.iterations,
            "residual_norm": self.residual_norm,
            "component_count": self.component_count,
        }


@dataclass(frozen=True)
class ComplexityResult:
    """Per-category complexity scores with actor-side index and diagnostics."""

    categories: tuple
    actors: tuple
    tci: np.ndarray          # standardized, mean 0 / population stdev 1
    tci_scaled: np.ndarray   # affine map of tci onto [0, 100]
    ubiquity: np.ndarray     # k_t0
    avg_diversity: np.ndarray  # k_t1, mean diversity of connected actors
    actor_index: np.ndarray  # standardized actor-side second eigenvector
    diagnostics: Diagnostics
    absent_categories: tuple = ()  # outside the analyzed component
    absent_actors: tuple = ()

    def category_series(self, which="tci"):
        vals = getattr(self, which)
        return dict(zip(self.categories, (float(v) for v in vals)))
