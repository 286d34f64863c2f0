"""Combining base-model forecasts by l2-normalized convex mixing.

Each base output is divided by its l2-norm-per-sample (|v| / N) before
the convex combination, so every contribution enters with the same
energy.  The global variant normalizes over the whole test range; the
batch variant normalizes each flood term independently, which removes
the bias gap between low-peak and extreme-peak terms.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import DegenerateInput, ShapeError, ValidationError, ZeroNormError

MODEL_ORDER = ("kernel", "rfoob", "svm")

SIMPLEX_TOL = 1e-12


def l2_norm(v):
    """sqrt(sum v_t^2)."""
    v = np.asarray(v, dtype=np.float64)
    return float(np.sqrt(np.sum(v * v)))


@dataclass(frozen=True)
class ModelOutput:
    """One base model's per-term forecast vectors with cached l2-norms."""

    model: str
    term_ids: tuple
    vectors: tuple  # per-term forecast arrays
    norms: tuple = None

    def __post_init__(self):
        vectors = tuple(np.asarray(v, dtype=np.float64) for v in self.vectors)
        term_ids = tuple(int(t) for t in self.term_ids)
        if len(vectors) != len(term_ids):
            raise ShapeError("one vector per term id required")
        norms = self.norms
        if norms is None:
            norms = tuple(l2_norm(v) for v in vectors)
        else:
            norms = tuple(float(x) for x in norms)
            for cached, v in zip(norms, vectors):
                if abs(cached - l2_norm(v)) > 1e-12 * max(1.0, l2_norm(v)):
                    raise ValidationError(
                        f"{self.model}: cached norm {cached} disagrees with recomputed value"
                    )
        object.__setattr__(self, "model", str(self.model))
        object.__setattr__(self, "term_ids", term_ids)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "norms", norms)

    @classmethod
    def from_rows(cls, model, yhat, term_of_row):
        """Split a flat forecast vector into per-term vectors."""
        yhat = np.asarray(yhat, dtype=np.float64)
        term_of_row = np.asarray(term_of_row)
        ids = list(dict.fromkeys(term_of_row.tolist()))
        vectors = [yhat[term_of_row == t] for t in ids]
        return cls(model=model, term_ids=tuple(ids), vectors=tuple(vectors))

    @property
    def n_samples(self):
        return sum(v.size for v in self.vectors)

    def concatenated(self):
        return np.concatenate(self.vectors)


@dataclass(frozen=True)
class CoefficientSet:
    """Per-term, per-model convex coefficients (one simplex per term)."""

    term_ids: tuple
    models: tuple
    alphas: np.ndarray  # (B, M)

    def __post_init__(self):
        alphas = np.asarray(self.alphas, dtype=np.float64)
        term_ids = tuple(int(t) for t in self.term_ids)
        models = tuple(self.models)
        if alphas.shape != (len(term_ids), len(models)):
            raise ShapeError(f"alphas shape {alphas.shape} != (terms, models)")
        if np.any(alphas < 0):
            raise ValidationError("ensemble coefficients must be nonnegative")
        sums = alphas.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > SIMPLEX_TOL):
            raise ValidationError("ensemble coefficients must sum to 1 per term")
        object.__setattr__(self, "term_ids", term_ids)
        object.__setattr__(self, "models", models)
        object.__setattr__(self, "alphas", alphas)

    @classmethod
    def uniform(cls, term_ids, models=MODEL_ORDER):
        b, m = len(term_ids), len(models)
        return cls(term_ids=tuple(term_ids), models=tuple(models),
                   alphas=np.full((b, m), 1.0 / m))

    @classmethod
    def common(cls, term_ids, models, coeffs):
        """The same coefficient vector applied to every term."""
        coeffs = np.asarray(coeffs, dtype=np.float64)
        return cls(term_ids=tuple(term_ids), models=tuple(models),
                   alphas=np.tile(coeffs, (len(term_ids), 1)))

    def for_term(self, term_id):
        return self.alphas[self.term_ids.index(term_id)]


def _check_norm(norm, model, term_id=None):
    if norm == 0:
        where = "" if term_id is None else f" in term {term_id}"
        raise ZeroNormError(f"model {model!r} has zero-norm output{where}",
                            model=model, term_id=term_id)


def _warn_equal_norms(norms, models, term_id=None):
    # equal norms are descriptive only in the combination rule; warn, don't fail
    for i in range(len(norms)):
        for j in range(i + 1, len(norms)):
            if norms[i] == norms[j]:
                where = "" if term_id is None else f" in term {term_id}"
                warnings.warn(
                    f"models {models[i]!r} and {models[j]!r} have equal l2-norms{where}",
                    stacklevel=3,
                )
                return


def global_ensemble(outputs, a):
    """Convex combination of whole-range outputs, each divided by |v|/N.

    ``outputs`` may be ModelOutput instances (their term vectors are
    concatenated) or plain (model, vector) pairs.
    """
    tagged = []
    for out in outputs:
        if isinstance(out, ModelOutput):
            tagged.append((out.model, out.concatenated()))
        else:
            model, v = out
            tagged.append((str(model), np.asarray(v, dtype=np.float64)))
    a = np.asarray(a, dtype=np.float64)
    if a.size != len(tagged):
        raise ShapeError("one coefficient per model required")
    if np.any(a < 0) or abs(a.sum() - 1.0) > SIMPLEX_TOL:
        raise ValidationError("coefficients must be nonnegative and sum to 1")
    n = tagged[0][1].size
    for model, v in tagged:
        if v.size != n:
            raise ShapeError(f"model {model!r} output length {v.size} != {n}")
    norms = [l2_norm(v) for _, v in tagged]
    for (model, _), norm in zip(tagged, norms):
        _check_norm(norm, model)
    _warn_equal_norms(norms, [m for m, _ in tagged])
    combined = np.zeros(n)
    for ai, (_, v), norm in zip(a, tagged, norms):
        combined += ai * v / (norm / n)
    return combined


def batch_ensemble(outputs, coeffs):
    """Per-term l2-normalized combination (the batch-term variant).

    For each term b the accumulation is
    yhat_b += alpha_mdl^b * yhat_b^mdl / (|yhat_b^mdl| / N_b)
    over the models, exactly mirroring the per-model loop.  Returns a
    list of per-term combined vectors in term order.
    """
    outputs = list(outputs)
    if not outputs:
        raise ShapeError("no model outputs given")
    term_ids = outputs[0].term_ids
    for out in outputs:
        if out.term_ids != term_ids:
            raise ShapeError(f"model {out.model!r} has mismatched term ids")
    models = tuple(out.model for out in outputs)
    if tuple(coeffs.models) != models:
        raise ShapeError(f"coefficient models {coeffs.models} != outputs {models}")
    if tuple(coeffs.term_ids) != term_ids:
        raise ShapeError("coefficient term ids do not match the outputs")

    combined = []
    for bi, term_id in enumerate(term_ids):
        n_b = outputs[0].vectors[bi].size
        norms = [out.norms[bi] for out in outputs]
        for out, norm in zip(outputs, norms):
            if out.vectors[bi].size != n_b:
                raise ShapeError(f"term {term_id}: vector lengths differ across models")
            _check_norm(norm, out.model, term_id)
        _warn_equal_norms(norms, models, term_id)
        acc = np.zeros(n_b)
        for mi, out in enumerate(outputs):
            alpha = coeffs.alphas[bi, mi]
            acc = acc + alpha * out.vectors[bi] / (norms[mi] / n_b)
        combined.append(acc)
    return combined


@dataclass(frozen=True)
class MedianSigmaResult:
    models: tuple
    raw: np.ndarray  # median + sample std of per-term norms, per model
    coefficients: np.ndarray  # raw normalized onto the simplex


def median_sigma_coeffs(norm_table, models=None):
    """Common per-model coefficients from the per-term norm table.

    raw_mdl = median over terms of |yhat_b^mdl| plus the sample (n-1)
    standard deviation over terms; coefficients are raw / sum(raw).  The
    raw values are kept so alternative normalizations can be audited.
    """
    if isinstance(norm_table, dict):
        models = tuple(norm_table.keys())
        rows = [np.asarray(norm_table[m], dtype=np.float64) for m in models]
    else:
        rows = [np.asarray(r, dtype=np.float64) for r in np.asarray(norm_table, dtype=np.float64)]
        models = tuple(models) if models is not None else tuple(range(len(rows)))
    b = rows[0].size
    if b < 2:
        raise ShapeError("median+sigma coefficients need at least 2 terms")
    for r in rows:
        if r.size != b:
            raise ShapeError("norm table rows must share the term axis")
    raw = np.array([float(np.median(r) + np.std(r, ddof=1)) for r in rows])
    total = raw.sum()
    if total == 0:
        raise DegenerateInput("all median+sigma values are zero")
    return MedianSigmaResult(models=models, raw=raw, coefficients=raw / total)


def norm_table(outputs):
    """Per-model rows of per-term l2-norms, for reports and coefficients."""
    return {out.model: np.asarray(out.norms, dtype=np.float64) for out in outputs}


def grid_search_term_coeffs(outputs, actual_terms, step=0.05):
    """Per-term simplex grid search minimizing in-term MSE.

    This is an oracle fit against the supplied actuals; in the pipeline
    it runs only inside the evaluation stage and the result is labelled
    as such.  Returns a CoefficientSet.
    """
    outputs = list(outputs)
    term_ids = outputs[0].term_ids
    models = tuple(out.model for out in outputs)
    m = len(models)
    ticks = int(round(1.0 / step))
    best = np.zeros((len(term_ids), m))
    for bi, term_id in enumerate(term_ids):
        y = np.asarray(actual_terms[bi], dtype=np.float64)
        contribs = []
        for out in outputs:
            _check_norm(out.norms[bi], out.model, term_id)
            contribs.append(out.vectors[bi] / (out.norms[bi] / y.size))
        best_mse, best_alpha = np.inf, None
        for counts in product(range(ticks + 1), repeat=m - 1):
            if sum(counts) > ticks:
                continue
            alpha = np.array(list(counts) + [ticks - sum(counts)], dtype=np.float64) / ticks
            combined = sum(al * c for al, c in zip(alpha, contribs))
            err = float(np.mean((combined - y) ** 2))
            if err < best_mse:
                best_mse, best_alpha = err, alpha
        best[bi] = best_alpha
    return CoefficientSet(term_ids=term_ids, models=models, alphas=best)
