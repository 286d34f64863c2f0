import numpy as np
import pytest
from scipy.optimize import minimize

from floodcast.errors import ConvergenceError, ValidationError
from floodcast.learners import SvrSpec, fit_svr, load_model, save_model
from floodcast.learners.svr import dual_objective, kernel_matrix


def qp_oracle(K, y, box, epsilon):
    """Generic QP solve of the SVR dual in (alpha, alpha*) variables."""
    n = y.size

    def objective(z):
        beta = z[:n] - z[n:]
        return 0.5 * beta @ K @ beta - y @ beta + epsilon * z.sum()

    def grad(z):
        beta = z[:n] - z[n:]
        g = K @ beta
        return np.concatenate([g - y + epsilon, -g + y + epsilon])

    cons = {"type": "eq", "fun": lambda z: z[:n].sum() - z[n:].sum(),
            "jac": lambda z: np.concatenate([np.ones(n), -np.ones(n)])}
    bounds = [(0.0, c) for c in box] * 2
    best = None
    for start_scale in (0.0, 0.1):
        z0 = np.full(2 * n, start_scale * box.min())
        res = minimize(objective, z0, jac=grad, bounds=bounds, constraints=[cons],
                       method="SLSQP", options={"maxiter": 600, "ftol": 1e-14})
        if best is None or res.fun < best:
            best = res.fun
    return best


class TestFlatAndLinearCases:
    def test_tube_covers_data_no_support_vectors(self):
        rng = np.random.default_rng(0)
        X = rng.uniform(0, 1, size=(20, 3))
        y = 5.0 + rng.uniform(-0.05, 0.05, 20)
        model = fit_svr(X, y, np.ones(20), SvrSpec(epsilon=0.2, kernel="linear"))
        assert model.n_support == 0
        np.testing.assert_allclose(model.predict(X), np.full(20, model.bias))
        assert np.abs(model.predict(X) - y).max() <= 0.2 + 1e-9

    def test_exact_linear_data_within_tube(self):
        rng = np.random.default_rng(1)
        X = rng.uniform(0, 1, size=(40, 2))
        y = 3.0 * X[:, 0] - 2.0 * X[:, 1] + 1.0
        model = fit_svr(X, y, np.ones(40),
                        SvrSpec(box_constraint=1e4, epsilon=0.01, kernel="linear"))
        resid = np.abs(model.predict(X) - y)
        assert resid.max() <= 0.01 + 1e-6


class TestQpOracle:
    @pytest.mark.parametrize("kernel,order", [("linear", 2.0), ("polynomial", 2.0)])
    def test_tiny_instances_match_qp(self, kernel, order):
        rng = np.random.default_rng(2)
        for trial in range(6):
            n = int(rng.integers(3, 7))
            X = rng.uniform(0, 1, size=(n, 2))
            y = rng.normal(0, 1, n)
            w = rng.uniform(0.5, 1.5, n)
            spec = SvrSpec(box_constraint=2.0, epsilon=0.1, kernel=kernel, poly_order=order)
            model = fit_svr(X, y, w, spec)
            K = kernel_matrix(model.scaler.transform(X), model.scaler.transform(X),
                              kernel, order)
            box = spec.box_constraint * w
            oracle = qp_oracle(K, y, box, spec.epsilon)
            got = model.diagnostics["dual_objective"]
            assert got <= oracle + 1e-6

    def test_real_poly_order_consistency(self):
        rng = np.random.default_rng(3)
        n = 5
        X = rng.uniform(0, 1, size=(n, 2))
        y = rng.normal(0, 1, n)
        w = np.ones(n)
        spec = SvrSpec(box_constraint=3.0, epsilon=0.05, kernel="polynomial", poly_order=2.5)
        model = fit_svr(X, y, w, spec)
        K = kernel_matrix(model.scaler.transform(X), model.scaler.transform(X),
                          "polynomial", 2.5)
        oracle = qp_oracle(K, y, spec.box_constraint * w, spec.epsilon)
        assert model.diagnostics["dual_objective"] <= oracle + 1e-6


class TestKktAndBoxes:
    def test_dual_variables_in_box_and_gap(self):
        rng = np.random.default_rng(4)
        X = rng.uniform(0, 1, size=(60, 3))
        y = np.sin(3 * X[:, 0]) + rng.normal(0, 0.1, 60)
        w = rng.uniform(0.1, 2.0, 60)
        spec = SvrSpec(box_constraint=5.0, epsilon=0.05)
        model = fit_svr(X, y, w, spec)
        alpha, alpha_star = model.dual
        box = model.box
        assert (alpha >= -1e-15).all() and (alpha <= box + 1e-12).all()
        assert (alpha_star >= -1e-15).all() and (alpha_star <= box + 1e-12).all()
        assert model.diagnostics["kkt_gap"] <= 1e-6

    def test_equality_constraint(self):
        rng = np.random.default_rng(5)
        X = rng.uniform(0, 1, size=(30, 2))
        y = rng.normal(size=30)
        model = fit_svr(X, y, np.ones(30), SvrSpec(epsilon=0.01))
        alpha, alpha_star = model.dual
        assert abs(alpha.sum() - alpha_star.sum()) <= 1e-10


class TestWeightSemantics:
    def test_zero_weight_removal_identity(self):
        rng = np.random.default_rng(6)
        X = rng.uniform(0, 1, size=(25, 2))
        y = rng.normal(size=25)
        w = np.ones(25)
        w[[3, 11, 19]] = 0.0
        keep = w > 0
        spec = SvrSpec(box_constraint=2.0, epsilon=0.05)
        full = fit_svr(X, y, w, spec)
        trimmed = fit_svr(X[keep], y[keep], w[keep], spec)
        probe = rng.uniform(0, 1, size=(8, 2))
        np.testing.assert_allclose(full.predict(probe), trimmed.predict(probe), atol=1e-10)

    def test_zero_weight_rows_never_support(self):
        rng = np.random.default_rng(7)
        X = rng.uniform(0, 1, size=(25, 2))
        y = rng.normal(size=25)
        w = np.ones(25)
        w[:10] = 0.0
        model = fit_svr(X, y, w, SvrSpec(epsilon=0.0, box_constraint=10.0))
        alpha, alpha_star = model.dual
        assert np.all(alpha[:10] == 0) and np.all(alpha_star[:10] == 0)


class TestErrorsAndValidation:
    def test_poly_order_range(self):
        with pytest.raises(ValidationError):
            SvrSpec(kernel="polynomial", poly_order=3.5)
        SvrSpec(kernel="polynomial", poly_order=2.97)

    def test_convergence_error(self):
        rng = np.random.default_rng(8)
        X = rng.uniform(0, 1, size=(50, 2))
        y = rng.normal(size=50) * 10
        with pytest.raises(ConvergenceError) as err:
            fit_svr(X, y, np.ones(50), SvrSpec(box_constraint=100.0, epsilon=0.0),
                    max_iter=3)
        assert err.value.residual is not None

    def test_dual_objective_helper(self):
        K = np.eye(3)
        y = np.array([1.0, -1.0, 0.5])
        beta = np.array([0.2, -0.2, 0.0])
        expect = 0.5 * (0.04 + 0.04) - (0.2 + 0.2) + 0.1 * 0.4
        assert abs(dual_objective(K, y, beta, 0.1) - expect) < 1e-12


class TestPersistence:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(9)
        X = rng.uniform(0, 1, size=(30, 3))
        y = np.sin(X[:, 0] * 3) + rng.normal(0, 0.05, 30)
        model = fit_svr(X, y, np.ones(30), SvrSpec(), column_names=("a", "b", "c"))
        save_model(model, tmp_path / "svr")
        loaded = load_model(tmp_path / "svr")
        assert np.array_equal(model.predict(X), loaded.predict(X))
