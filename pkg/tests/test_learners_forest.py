import numpy as np
import pytest

from floodcast.learners import ForestSpec, fit_forest, load_model, oob_importance, save_model


def friedman_like(n=250, seed=0, noise=0.2):
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 1, size=(n, 5))
    y = 10 * np.sin(np.pi * X[:, 0] * X[:, 1]) + 20 * (X[:, 2] - 0.5) ** 2 + noise * rng.normal(size=n)
    return X, y


class TestStumpLimit:
    def test_min_leaf_at_n_gives_weighted_mean_trees(self):
        X, y = friedman_like(n=200, seed=1)
        w = np.random.default_rng(2).uniform(0.2, 2.0, 200)
        spec = ForestSpec(min_leaf_size=200, n_trees=20, seed=0)
        model = fit_forest(X, y, w, spec)
        preds = model.tree_predictions(X)
        for t in range(20):
            assert np.ptp(preds[t]) == 0.0  # each tree is a constant
            counts = model.in_bag_counts[t].astype(float)
            bag_mean = counts @ y / counts.sum()
            assert abs(preds[t, 0] - bag_mean) < 1e-12
        # OOB error approximates the weighted target variance
        mu = np.sum(w * y) / np.sum(w)
        var = np.sum(w * (y - mu) ** 2) / np.sum(w)
        assert abs(model.oob_mse - var) < 0.35 * var


class TestOobBehaviour:
    def test_noise_target_oob_worse_than_train(self):
        rng = np.random.default_rng(3)
        X = rng.uniform(size=(300, 4))
        y = rng.normal(size=300)  # pure noise
        model = fit_forest(X, y, np.ones(300), ForestSpec(min_leaf_size=1, n_trees=30, seed=1))
        train_mse = float(np.mean((model.predict(X) - y) ** 2))
        assert model.oob_mse >= train_mse

    def test_row_oob_nowhere_warns(self):
        X, y = friedman_like(n=12, seed=4)
        # one tree: roughly 1/3 of rows are OOB, the rest trigger the warning
        with pytest.warns(UserWarning):
            fit_forest(X, y, np.ones(12), ForestSpec(n_trees=1, seed=0))

    def test_oob_excludes_in_bag_rows(self):
        X, y = friedman_like(n=100, seed=5)
        model = fit_forest(X, y, np.ones(100), ForestSpec(n_trees=15, seed=2))
        # recompute the OOB prediction from per-tree records
        total = np.zeros(100)
        hits = np.zeros(100)
        for t, tree in enumerate(model.trees):
            oob = np.flatnonzero(model.in_bag_counts[t] == 0)
            total[oob] += tree.predict(X[oob])
            hits[oob] += 1
        covered = hits > 0
        np.testing.assert_allclose(
            model.oob_prediction[covered], total[covered] / hits[covered], rtol=1e-12
        )


class TestWeightSemantics:
    def test_zero_weight_rows_never_in_bag(self):
        X, y = friedman_like(n=150, seed=6)
        rng = np.random.default_rng(7)
        for seed in range(5):
            w = rng.uniform(0.1, 1.0, 150)
            w[rng.choice(150, 30, replace=False)] = 0.0
            model = fit_forest(X, y, w, ForestSpec(n_trees=10, seed=seed))
            assert model.in_bag_counts[:, w == 0].sum() == 0

    def test_bootstrap_deterministic(self):
        X, y = friedman_like(n=80, seed=8)
        w = np.ones(80)
        a = fit_forest(X, y, w, ForestSpec(n_trees=8, seed=11))
        b = fit_forest(X, y, w, ForestSpec(n_trees=8, seed=11))
        assert np.array_equal(a.in_bag_counts, b.in_bag_counts)
        assert np.array_equal(a.predict(X), b.predict(X))


class TestPrediction:
    def test_forest_is_mean_of_trees(self):
        X, y = friedman_like(n=120, seed=9)
        model = fit_forest(X, y, np.ones(120), ForestSpec(n_trees=12, seed=3))
        probe = np.random.default_rng(10).uniform(size=(30, 5))
        per_tree = model.tree_predictions(probe)
        np.testing.assert_allclose(model.predict(probe), per_tree.mean(axis=0), rtol=1e-12)

    def test_fit_quality_on_smooth_target(self):
        X, y = friedman_like(n=400, seed=11, noise=0.0)
        model = fit_forest(X, y, np.ones(400), ForestSpec(min_leaf_size=3, n_trees=40, seed=4))
        resid = model.predict(X) - y
        assert np.sqrt(np.mean(resid**2)) < 1.0

    def test_quantile_prediction_brackets_mean(self):
        X, y = friedman_like(n=200, seed=12)
        model = fit_forest(X, y, np.ones(200), ForestSpec(min_leaf_size=10, n_trees=20, seed=5))
        probe = X[:10]
        lo = model.predict_quantile(probe, 0.1)
        hi = model.predict_quantile(probe, 0.9)
        assert (lo <= hi).all()


class TestImportance:
    def _copy_vs_noise(self, seed=0):
        rng = np.random.default_rng(seed)
        n = 300
        signal = rng.uniform(0, 1, n)
        X = np.column_stack([signal, rng.uniform(0, 1, (n, 3))])
        y = signal.copy()
        model = fit_forest(X, y, np.ones(n), ForestSpec(min_leaf_size=5, n_trees=30, seed=seed))
        return model, X, y

    def test_exact_copy_dominates_noise(self):
        model, X, y = self._copy_vs_noise(seed=13)
        imp = oob_importance(model, X, y, n_repeats=3, seed=0)
        assert imp.importance[0] >= 10 * imp.importance[1:].max()

    def test_constant_column_importance_zero(self):
        rng = np.random.default_rng(14)
        n = 200
        X = np.column_stack([rng.uniform(0, 1, n), np.full(n, 3.0)])
        y = X[:, 0]
        model = fit_forest(X, y, np.ones(n), ForestSpec(n_trees=20, seed=6))
        imp = oob_importance(model, X, y, n_repeats=2, seed=1)
        assert imp.raw[1] == 0.0

    def test_duplicated_column_combined_importance(self):
        rng = np.random.default_rng(15)
        n = 300
        signal = rng.uniform(0, 1, n)
        X = np.column_stack([signal, signal, rng.uniform(0, 1, n)])
        y = signal + 0.05 * rng.normal(size=n)
        model = fit_forest(X, y, np.ones(n), ForestSpec(min_leaf_size=5, n_trees=30, seed=7))
        imp = oob_importance(model, X, y, n_repeats=3, seed=2)
        combined = imp.raw[0] + imp.raw[1]
        assert combined >= max(imp.raw[0], imp.raw[1])
        assert combined > 5 * abs(imp.raw[2])

    def test_importance_deterministic(self):
        model, X, y = self._copy_vs_noise(seed=16)
        a = oob_importance(model, X, y, n_repeats=2, seed=9)
        b = oob_importance(model, X, y, n_repeats=2, seed=9)
        assert np.array_equal(a.raw, b.raw)


class TestPersistence:
    def test_roundtrip_bit_exact(self, tmp_path):
        X, y = friedman_like(n=150, seed=17)
        w = np.random.default_rng(18).uniform(0.5, 1.5, 150)
        model = fit_forest(X, y, w, ForestSpec(n_trees=10, seed=8),
                           column_names=tuple("abcde"))
        save_model(model, tmp_path / "forest")
        loaded = load_model(tmp_path / "forest")
        probe = np.random.default_rng(19).uniform(size=(40, 5))
        assert np.array_equal(model.predict(probe), loaded.predict(probe))
        assert loaded.oob_mse == model.oob_mse
        assert loaded.schema == tuple("abcde")
