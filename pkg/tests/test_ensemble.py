import numpy as np
import pytest

from floodcast.ensemble import (
    CoefficientSet,
    MedianSigmaResult,
    ModelOutput,
    batch_ensemble,
    global_ensemble,
    grid_search_term_coeffs,
    l2_norm,
    median_sigma_coeffs,
    norm_table,
)
from floodcast.errors import ShapeError, ValidationError, ZeroNormError

# reference five-term norm table and its frozen median+sigma combination
REFERENCE_NORMS = {
    "kernel": [1.01, 0.86, 1.22, 3.23, 9.72],
    "rfoob": [1.93, 1.24, 3.17, 8.15, 25.18],
    "svm": [1.09, 0.79, 1.72, 3.82, 28.25],
}
REFERENCE_RAW = {
    "kernel": 4.98507237646237,
    "rfoob": 13.182798310162848,
    "svm": 13.583343963655441,
}
REFERENCE_COEFFS = {
    "kernel": 0.1570041471285353,
    "rfoob": 0.4151903621755246,
    "svm": 0.42780549069594015,
}


class TestL2Norm:
    def test_three_four_five(self):
        assert l2_norm([3.0, 4.0]) == 5.0

    def test_zero_vector(self):
        assert l2_norm(np.zeros(7)) == 0.0

    def test_loop_oracle(self):
        rng = np.random.default_rng(0)
        v = rng.normal(size=100)
        expect = np.sqrt(sum(x * x for x in v))
        assert abs(l2_norm(v) - expect) < 1e-12


class TestModelOutput:
    def test_cached_norm_validated(self):
        v = np.array([3.0, 4.0])
        ModelOutput(model="kernel", term_ids=(1,), vectors=(v,), norms=(5.0,))
        with pytest.raises(ValidationError):
            ModelOutput(model="kernel", term_ids=(1,), vectors=(v,), norms=(5.1,))

    def test_from_rows(self):
        yhat = np.arange(10.0) + 1.0
        term_of_row = np.array([1] * 4 + [2] * 6)
        out = ModelOutput.from_rows("svm", yhat, term_of_row)
        assert out.term_ids == (1, 2)
        assert out.vectors[0].size == 4 and out.vectors[1].size == 6
        assert out.n_samples == 10


class TestGlobalEnsemble:
    def test_identity_when_norm_per_sample_is_one(self):
        n = 16
        v = np.full(n, 1.0) * np.sqrt(n)  # |v| = n, so |v|/n = 1
        out = global_ensemble([("kernel", v)], [1.0])
        np.testing.assert_allclose(out, v, rtol=1e-15)

    def test_three_identical_models(self):
        rng = np.random.default_rng(1)
        v = rng.gamma(2.0, 1.0, 20)
        with pytest.warns(UserWarning):  # equal norms are flagged, not fatal
            out = global_ensemble([("kernel", v), ("rfoob", v), ("svm", v)],
                                  [1 / 3, 1 / 3, 1 / 3])
        np.testing.assert_allclose(out, v / (l2_norm(v) / 20), rtol=1e-12)

    def test_published_denominators(self):
        # norm-per-sample values 0.3120, 0.7522, 0.7900 with equal thirds
        rng = np.random.default_rng(2)
        n = 50
        denoms = [0.3120, 0.7522, 0.7900]
        vecs = []
        for d in denoms:
            u = rng.uniform(0.1, 1.0, n)
            vecs.append(u / l2_norm(u) * (d * n))  # forces |v|/n == d
        out = global_ensemble(list(zip(("kernel", "rfoob", "svm"), vecs)),
                              [1 / 3, 1 / 3, 1 / 3])
        expect = sum(v / (3.0 * d) for v, d in zip(vecs, denoms))
        np.testing.assert_allclose(out, expect, rtol=1e-9)

    def test_zero_norm_names_model(self):
        with pytest.raises(ZeroNormError) as err:
            global_ensemble([("kernel", np.ones(4)), ("svm", np.zeros(4))], [0.5, 0.5])
        assert err.value.model == "svm"

    def test_simplex_validated(self):
        with pytest.raises(ValidationError):
            global_ensemble([("kernel", np.ones(4))], [0.9])


def _toy_outputs(rng, term_lengths=(6, 9), models=("kernel", "rfoob", "svm")):
    outputs = []
    for m in models:
        vectors = tuple(rng.uniform(0.1, 2.0, size=n) for n in term_lengths)
        outputs.append(ModelOutput(model=m, term_ids=tuple(range(1, len(term_lengths) + 1)),
                                   vectors=vectors))
    return outputs


class TestBatchEnsemble:
    def test_single_batch_reduces_to_global(self):
        rng = np.random.default_rng(3)
        outputs = _toy_outputs(rng, term_lengths=(12,))
        a = rng.dirichlet(np.ones(3))
        coeffs = CoefficientSet.common((1,), tuple(o.model for o in outputs), a)
        [batch] = batch_ensemble(outputs, coeffs)
        flat = global_ensemble(outputs, a)
        assert np.array_equal(batch, flat)

    def test_equal_terms_equal_outputs(self):
        rng = np.random.default_rng(4)
        base = [rng.uniform(0.1, 2.0, 8) for _ in range(3)]
        outputs = [
            ModelOutput(model=m, term_ids=(1, 2), vectors=(v, v.copy()))
            for m, v in zip(("kernel", "rfoob", "svm"), base)
        ]
        coeffs = CoefficientSet.uniform((1, 2))
        t1, t2 = batch_ensemble(outputs, coeffs)
        np.testing.assert_array_equal(t1, t2)

    def test_hand_rolled_loop_oracle(self):
        rng = np.random.default_rng(5)
        models = ("kernel", "rfoob")
        outputs = _toy_outputs(rng, term_lengths=(5, 7), models=models)
        alphas = np.array([[0.3, 0.7], [0.9, 0.1]])
        coeffs = CoefficientSet(term_ids=(1, 2), models=models, alphas=alphas)
        got = batch_ensemble(outputs, coeffs)
        for bi in range(2):
            n_b = outputs[0].vectors[bi].size
            acc = np.zeros(n_b)
            for mi, out in enumerate(outputs):
                v = out.vectors[bi]
                acc = acc + alphas[bi, mi] * v / (np.sqrt(np.sum(v**2)) / n_b)
            assert np.max(np.abs(acc - got[bi])) <= 1e-12

    def test_zero_norm_in_term(self):
        outputs = [
            ModelOutput(model="kernel", term_ids=(1, 2),
                        vectors=(np.ones(3), np.zeros(3)))
        ]
        coeffs = CoefficientSet(term_ids=(1, 2), models=("kernel",),
                                alphas=np.ones((2, 1)))
        with pytest.raises(ZeroNormError) as err:
            batch_ensemble(outputs, coeffs)
        assert err.value.term_id == 2

    def test_concatenated_length(self):
        rng = np.random.default_rng(6)
        outputs = _toy_outputs(rng, term_lengths=(4, 9, 5))
        coeffs = CoefficientSet.uniform((1, 2, 3))
        combined = batch_ensemble(outputs, coeffs)
        assert sum(v.size for v in combined) == 18


class TestInvariantProperties:
    def test_positive_homogeneity(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            n = int(rng.integers(4, 40))
            vecs = [rng.uniform(0.1, 2.0, n) for _ in range(3)]
            a = rng.dirichlet(np.ones(3))
            base = global_ensemble(list(zip("abc", vecs)), a)
            c = float(rng.uniform(1e-3, 1e3))
            scaled = [v.copy() for v in vecs]
            scaled[1] = scaled[1] * c
            out = global_ensemble(list(zip("abc", scaled)), a)
            assert np.max(np.abs(out - base)) <= 1e-9 * np.max(np.abs(base))

    def test_normalized_contribution_norm(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            n = int(rng.integers(4, 40))
            v = rng.uniform(0.1, 2.0, n)
            contrib = v / (l2_norm(v) / n)
            assert abs(l2_norm(contrib) - n) <= 1e-9 * n


class TestMedianSigma:
    def test_symmetric(self):
        norms = {m: np.array([1.0, 2.0, 3.0]) for m in ("kernel", "rfoob", "svm")}
        res = median_sigma_coeffs(norms)
        np.testing.assert_allclose(res.coefficients, [1 / 3, 1 / 3, 1 / 3], atol=1e-15)

    def test_reference_fixture(self):
        res = median_sigma_coeffs(REFERENCE_NORMS)
        assert isinstance(res, MedianSigmaResult)
        for m, raw, coeff in zip(res.models, res.raw, res.coefficients):
            assert abs(raw - REFERENCE_RAW[m]) < 1e-12
            assert abs(coeff - REFERENCE_COEFFS[m]) < 1e-12
        assert abs(res.coefficients.sum() - 1.0) < 1e-12

    def test_scaling_one_model(self):
        res = median_sigma_coeffs(REFERENCE_NORMS)
        scaled = {m: np.asarray(v) for m, v in REFERENCE_NORMS.items()}
        scaled["svm"] = scaled["svm"] * 2.0
        res2 = median_sigma_coeffs(scaled)
        i = res.models.index("svm")
        assert abs(res2.raw[i] - 2.0 * res.raw[i]) < 1e-10
        for j, m in enumerate(res.models):
            if m != "svm":
                assert abs(res2.raw[j] - res.raw[j]) < 1e-12

    def test_needs_two_terms(self):
        with pytest.raises(ShapeError):
            median_sigma_coeffs({"kernel": [1.0], "svm": [2.0]})


class TestCoefficientsAndSearch:
    def test_simplex_validation(self):
        with pytest.raises(ValidationError):
            CoefficientSet(term_ids=(1,), models=("a", "b"),
                           alphas=np.array([[0.6, 0.6]]))

    def test_norm_table(self):
        rng = np.random.default_rng(9)
        outputs = _toy_outputs(rng)
        table = norm_table(outputs)
        assert set(table) == {"kernel", "rfoob", "svm"}
        assert all(v.size == 2 for v in table.values())

    def test_grid_search_is_grid_minimum(self):
        rng = np.random.default_rng(10)
        y = rng.uniform(0.5, 2.0, 24)
        outputs = _toy_outputs(rng, term_lengths=(24,))
        coeffs = grid_search_term_coeffs(outputs, [y], step=0.25)

        def mix_mse(alpha):
            acc = sum(
                al * o.vectors[0] / (o.norms[0] / 24) for al, o in zip(alpha, outputs)
            )
            return float(np.mean((acc - y) ** 2))

        best = mix_mse(coeffs.for_term(1))
        # grid minimum beats every vertex and the uniform mixture
        for vertex in np.eye(3):
            assert best <= mix_mse(vertex) + 1e-12
        assert best <= mix_mse(np.ones(3) / 3) + 1e-12
