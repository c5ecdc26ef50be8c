import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import Pipeline

from tcindex.estimators import RtaBinarizer, RtaTransformer, TechnologyComplexity


@pytest.fixture
def weights():
    rng = np.random.default_rng(21)
    return rng.random((25, 8)) + 0.05


class TestRtaTransformer:
    def test_uniform_is_one(self):
        X = np.full((4, 3), 2.0)
        out = RtaTransformer().fit_transform(X)
        assert np.allclose(out, 1.0)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            RtaTransformer().fit(np.array([[1.0, -1.0]]))


class TestRtaBinarizer:
    def test_binary_output(self, weights):
        out = RtaBinarizer().fit_transform(weights)
        assert out.shape == weights.shape
        assert set(np.unique(out)) <= {0, 1}

    def test_threshold_param(self, weights):
        loose = RtaBinarizer(threshold=0.5).fit_transform(weights)
        tight = RtaBinarizer(threshold=2.0).fit_transform(weights)
        assert loose.sum() >= tight.sum()

    def test_get_set_params_and_clone(self):
        est = RtaBinarizer(threshold=1.5)
        assert est.get_params() == {"threshold": 1.5}
        est2 = clone(est).set_params(threshold=0.9)
        assert est2.get_params()["threshold"] == 0.9


class TestTechnologyComplexity:
    def test_fit_attributes(self, weights):
        est = TechnologyComplexity().fit(weights)
        n_kept = est.category_mask_.sum()
        assert est.tci_.shape == (n_kept,)
        assert abs(est.tci_.mean()) < 1e-9
        assert abs(est.tci_.std() - 1.0) < 1e-9
        assert est.tci_scaled_.min() == 0.0
        assert est.tci_scaled_.max() == 100.0
        assert est.actor_index_.shape == (est.actor_mask_.sum(),)
        assert est.diagnostics_["component_count"] >= 1
        assert est.n_features_in_ == weights.shape[1]

    def test_matches_functional_core(self, weights):
        from tcindex.bipartite import specialize
        from tcindex.complexity import tci_eigen
        from tcindex.matrices import WeightMatrix

        est = TechnologyComplexity().fit(weights)
        w = WeightMatrix(
            actors=tuple(f"a{i}" for i in range(weights.shape[0])),
            categories=tuple(f"c{j}" for j in range(weights.shape[1])),
            weights=weights,
        )
        expected = tci_eigen(specialize(w))
        assert np.allclose(est.tci_, expected.tci)

    def test_pipeline_composition(self, weights):
        pipe = Pipeline([("identity", RtaTransformer()), ("tci", TechnologyComplexity())])
        pipe.fit(weights)
        assert hasattr(pipe.named_steps["tci"], "tci_")

    def test_params_roundtrip(self):
        est = TechnologyComplexity(threshold=1.2, largest_component=True)
        params = est.get_params()
        assert params == {"threshold": 1.2, "largest_component": True}
        assert clone(est).get_params() == params
