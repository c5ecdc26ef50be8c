"""scikit-learn compatible wrappers around the functional core.

These operate on plain 2-D arrays so they compose with sklearn pipelines;
labelled inputs and the full result objects live in the functional API.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import bipartite, complexity
from .matrices import SpecializationMatrix, WeightMatrix
from .validation import check_weight_array


def _as_weight_matrix(X) -> WeightMatrix:
    arr = check_weight_array(X)
    return WeightMatrix(
        actors=tuple(f"a{i}" for i in range(arr.shape[0])),
        categories=tuple(f"c{j}" for j in range(arr.shape[1])),
        weights=arr,
    )


class RtaTransformer(BaseEstimator, TransformerMixin):
    """Turn nonnegative activity weights into revealed-advantage ratios."""

    def fit(self, X, y=None):
        X = check_weight_array(X)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        return bipartite.compute_rta(_as_weight_matrix(X))


class RtaBinarizer(BaseEstimator, TransformerMixin):
    """Binary specialization matrix from weights: RTA >= threshold.

    Shape-preserving: rows/columns are not pruned here so the transform can
    sit inside a pipeline; pruning happens in the complexity estimator.
    """

    def __init__(self, threshold=1.0):
        self.threshold = threshold

    def fit(self, X, y=None):
        X = check_weight_array(X)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        if self.threshold <= 0:
            raise ValueError(f"threshold must be positive, got {self.threshold}")
        rta = bipartite.compute_rta(_as_weight_matrix(X))
        return (rta >= self.threshold).astype(np.int8)


class TechnologyComplexity(BaseEstimator):
    """Complexity scores for the categories (columns) of a weight matrix.

    fit(X) runs RTA -> binarize -> second-eigenvector scoring. Columns or
    rows pruned as zero-degree are reported through the boolean masks;
    scores are aligned with the retained labels.

    Attributes
    ----------
    tci_ : standardized per-category score (mean 0, population stdev 1)
    tci_scaled_ : the same scores mapped onto [0, 100]
    ubiquity_, avg_diversity_ : degree and first-reflection values
    actor_index_ : standardized per-row score
    category_mask_, actor_mask_ : which input columns/rows were retained
    diagnostics_ : solver diagnostics dict
    """

    def __init__(self, threshold=1.0, largest_component=False):
        self.threshold = threshold
        self.largest_component = largest_component

    def fit(self, X, y=None):
        w = _as_weight_matrix(X)
        self.n_features_in_ = w.shape[1]
        spec = bipartite.specialize(w, threshold=self.threshold)
        result = complexity.tci_eigen(spec, largest_component=self.largest_component)
        kept_c = set(result.categories)
        kept_a = set(result.actors)
        self.category_mask_ = np.array([c in kept_c for c in w.categories])
        self.actor_mask_ = np.array([a in kept_a for a in w.actors])
        self.tci_ = result.tci
        self.tci_scaled_ = result.tci_scaled
        self.ubiquity_ = result.ubiquity
        self.avg_diversity_ = result.avg_diversity
        self.actor_index_ = result.actor_index
        self.diagnostics_ = result.diagnostics.as_dict()
        self.result_ = result
        return self

    def specialization_matrix(self, X) -> SpecializationMatrix:
        """Pruned binary network for the given weights (stateless helper)."""
        return bipartite.specialize(_as_weight_matrix(X), threshold=self.threshold)
