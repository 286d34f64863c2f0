import numpy as np
import pytest

from floodcast.errors import DegenerateInput, ShapeError, ZeroNormError
from floodcast.metrics import (
    check_proposition1,
    fcd,
    mae,
    mse,
    mse_skill_identity_residual,
    rmse,
    sim,
    skill_report,
)
from floodcast.timeseries import FloodTerm, FloodTermSet


class TestBasicErrors:
    def test_mse_zero(self):
        y = np.arange(5.0)
        assert mse(y, y) == 0.0

    def test_mse_offset_one(self):
        y = np.arange(5.0)
        assert mse(y + 1.0, y) == 1.0

    def test_mse_loop_oracle(self):
        rng = np.random.default_rng(0)
        yhat, y = rng.normal(size=50), rng.normal(size=50)
        expect = sum((a - b) ** 2 for a, b in zip(yhat, y)) / 50
        assert abs(mse(yhat, y) - expect) < 1e-12

    def test_mae_rmse(self):
        y = np.zeros(4)
        yhat = np.array([1.0, -1.0, 1.0, -1.0])
        assert mae(yhat, y) == 1.0
        assert rmse(yhat, y) == 1.0

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            mse(np.zeros(3), np.zeros(4))


class TestSim:
    def test_self(self):
        v = np.array([1.0, 2.0, 3.0])
        assert sim(v, v) == 1.0

    def test_negated(self):
        v = np.array([1.0, 2.0, 3.0])
        assert sim(v, -v) == -1.0

    def test_orthogonal(self):
        assert sim(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_zero_norm(self):
        with pytest.raises(ZeroNormError):
            sim(np.zeros(3), np.ones(3))

    def test_scale_invariance(self):
        rng = np.random.default_rng(1)
        a, b = rng.normal(size=20), rng.normal(size=20)
        assert abs(sim(3.5 * a, b) - sim(a, b)) < 1e-12
        assert abs(sim(a, 0.2 * b) - sim(a, b)) < 1e-12


class TestIdentity:
    def test_exact_on_equal(self):
        y = np.random.default_rng(2).gamma(2.0, 1.0, 30)
        assert mse_skill_identity_residual(y, y) <= 1e-12

    def test_scaled(self):
        y = np.random.default_rng(3).gamma(2.0, 1.0, 30)
        assert mse_skill_identity_residual(2.0 * y, y) <= 1e-10

    def test_random_pairs(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            n = int(rng.integers(2, 64))
            yhat = rng.normal(size=n)
            y = rng.normal(size=n)
            ny, nt = np.linalg.norm(yhat), np.linalg.norm(y)
            scale = max(mse(yhat, y) / (ny * nt), 1e-30)
            assert mse_skill_identity_residual(yhat, y) <= 1e-10 * max(scale, 1.0)


class TestFcd:
    def _terms(self):
        return FloodTermSet((FloodTerm(1, 0, 9), FloodTerm(2, 20, 34)))

    def test_perfect_forecast(self):
        rng = np.random.default_rng(5)
        y = rng.gamma(2.0, 5.0, 25)
        res = fcd(y, y, terms=self._terms())
        assert all(v == 1.0 for v in res.per_term.values())
        assert res.pooled == 1.0

    def test_term_mean_forecast_scores_zero(self):
        rng = np.random.default_rng(6)
        y = rng.gamma(2.0, 5.0, 25)
        term_of_row = np.array([1] * 10 + [2] * 15)
        yhat = np.empty_like(y)
        for t in (1, 2):
            yhat[term_of_row == t] = y[term_of_row == t].mean()
        res = fcd(yhat, y, term_of_row=term_of_row)
        for v in res.per_term.values():
            assert abs(v) < 1e-12

    def test_worse_than_mean_is_negative_with_warning(self):
        y = np.array([1.0, 2.0, 3.0, 4.0])
        yhat = np.array([4.0, 3.0, 2.0, 1.0])  # anti-correlated
        with pytest.warns(UserWarning):
            res = fcd(yhat, y, term_of_row=np.zeros(4, dtype=int))
        assert res.pooled < 0

    def test_zero_variance(self):
        with pytest.raises(DegenerateInput):
            fcd(np.ones(5), np.full(5, 3.0), term_of_row=np.zeros(5, dtype=int))


class TestProposition1:
    def test_single_model_equality(self):
        rng = np.random.default_rng(7)
        y = rng.gamma(2.0, 1.0, 12)
        yhat = rng.gamma(2.0, 1.0, 12)
        rep = check_proposition1([yhat], y, [1.0])
        assert abs(rep.lhs - rep.rhs) < 1e-12
        assert rep.holds

    def test_orthogonal_half_weights(self):
        # closed form: lhs = 1/2, rhs = 1/sqrt(2)
        y1 = np.array([1.0, 0.0])
        y2 = np.array([0.0, 1.0])
        rep = check_proposition1([y1, y2], y1, [0.5, 0.5])
        assert abs(rep.lhs - 0.5) < 1e-12
        assert abs(rep.rhs - 1.0 / np.sqrt(2.0)) < 1e-12
        assert rep.holds and rep.strict

    def test_random_nonnegative_sweep(self):
        rng = np.random.default_rng(8)
        for _ in range(500):
            n = int(rng.integers(4, 65))
            outputs = [rng.uniform(0.01, 1.0, size=n) for _ in range(3)]
            y = rng.uniform(0.01, 1.0, size=n)
            a = rng.dirichlet(np.ones(3))
            rep = check_proposition1(outputs, y, a)
            assert rep.holds
            assert rep.combined_norm <= 1.0 + 1e-12

    def test_degenerate_combination(self):
        y1 = np.array([1.0, 0.0])
        rep = check_proposition1([y1, -y1], np.array([1.0, 1.0]), [0.5, 0.5])
        assert rep.degenerate

    def test_simplex_enforced(self):
        y = np.ones(4)
        with pytest.raises(ShapeError):
            check_proposition1([y, y], y, [0.7, 0.7])


class TestSkillReport:
    def test_rows_and_fields(self):
        rng = np.random.default_rng(9)
        y = rng.gamma(2.0, 5.0, 30)
        yhat = y + rng.normal(0, 0.5, 30)
        term_of_row = np.array([1] * 10 + [2] * 20)
        rep = skill_report("kernel", yhat, y, term_of_row)
        rows = rep.rows()
        assert [r[0] for r in rows] == ["1", "2", "all"]
        for _, vals in rows:
            for key in ("fcd", "rmse", "mae", "sim", "norm_forecast", "norm_actual"):
                assert np.isfinite(vals[key])
