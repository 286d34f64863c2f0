"""Monthly ocean-feature vectors -> nonnegative hourly regression weights.

Pipeline: embed the per-month feature vectors to 3-D with exact t-SNE,
project the embedding onto its first principal component, min-max
standardize the scores, add a small positive floor, then expand the
monthly weights to hourly resolution over the flood terms.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateInput, ValidationError
from .timeseries import month_index, month_label

DEFAULT_EPSILON = 1e-8


@dataclass(frozen=True)
class MonthlyFeature:
    """Feature vector for one calendar month (month = months since 1970-01)."""

    month: int
    vector: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=np.float64)
        if vec.ndim != 1 or vec.size == 0:
            raise ValidationError("monthly feature vector must be a non-empty 1-D array")
        if not np.all(np.isfinite(vec)):
            raise ValidationError(f"month {self.label}: non-finite feature entries")
        vec = vec.copy()
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)
        object.__setattr__(self, "month", int(self.month))

    @property
    def label(self):
        return month_label(self.month)


def feature_matrix(features):
    """Stack MonthlyFeature vectors into (M, K), checking a shared K."""
    features = list(features)
    if not features:
        raise ValidationError("no monthly features given")
    k = features[0].vector.size
    for f in features:
        if f.vector.size != k:
            raise ValidationError(
                f"feature width mismatch: month {f.label} has {f.vector.size}, expected {k}"
            )
    return np.vstack([f.vector for f in features])


# ----------------------------------------------------------------------
# PCA core (shared with the feature-engineering reducers)
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class PcaModel:
    """Centered PCA basis with deterministic component signs.

    Each component's largest-magnitude loading is made positive so that
    scores do not flip sign between runs.
    """

    mean: np.ndarray
    components: np.ndarray  # (n_components, d), rows orthonormal
    explained_ratio: np.ndarray

    def transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        return (X - self.mean) @ self.components.T


def fit_pca(X):
    """Full PCA of the rows of X via thin SVD of the centered data."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValidationError("PCA needs a 2-D matrix with at least 2 rows")
    mean = X.mean(axis=0)
    centered = X - mean
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    var = svals**2
    total = var.sum()
    ratios = var / total if total > 0 else np.zeros_like(var)
    # sign convention: largest-|loading| coordinate positive
    for i in range(vt.shape[0]):
        j = int(np.argmax(np.abs(vt[i])))
        if vt[i, j] < 0:
            vt[i] = -vt[i]
    return PcaModel(mean=mean, components=vt, explained_ratio=ratios)


def components_for_threshold(explained_ratio, threshold):
    """Smallest c with cumulative explained variance >= threshold."""
    cum = np.cumsum(explained_ratio)
    idx = np.searchsorted(cum, threshold - 1e-12) + 1
    return min(int(idx), explained_ratio.size)


# ----------------------------------------------------------------------
# Exact t-SNE
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class TsneResult:
    embedding: np.ndarray  # (M, dims)
    kl_initial: float
    kl_final: float


def _pairwise_sq_dists(X):
    s = np.einsum("ij,ij->i", X, X)
    d2 = s[:, None] + s[None, :] - 2.0 * (X @ X.T)
    np.fill_diagonal(d2, 0.0)
    return np.maximum(d2, 0.0)


def _joint_probabilities(d2, perplexity):
    """Symmetrized conditional probabilities matching the target perplexity."""
    n = d2.shape[0]
    target = np.log(perplexity)
    p_cond = np.zeros((n, n))
    for i in range(n):
        row = np.delete(d2[i], i)
        beta, beta_min, beta_max = 1.0, -np.inf, np.inf
        for _ in range(64):
            expd = np.exp(-row * beta)
            total = expd.sum()
            if total <= 0:
                entropy = 0.0
                probs = np.zeros_like(row)
            else:
                probs = expd / total
                nz = probs > 0
                entropy = -np.sum(probs[nz] * np.log(probs[nz]))
            diff = entropy - target
            if abs(diff) < 1e-7:
                break
            if diff > 0:  # entropy too high -> sharpen
                beta_min = beta
                beta = beta * 2.0 if np.isinf(beta_max) else 0.5 * (beta + beta_max)
            else:
                beta_max = beta
                beta = beta / 2.0 if np.isinf(beta_min) else 0.5 * (beta + beta_min)
        p_cond[i, np.arange(n) != i] = probs
    p = (p_cond + p_cond.T) / (2.0 * n)
    return np.maximum(p, 1e-12)


def _lowdim_affinities(Y):
    num = 1.0 / (1.0 + _pairwise_sq_dists(Y))
    np.fill_diagonal(num, 0.0)
    q = num / num.sum()
    return np.maximum(q, 1e-12), num

def _kl(p, q):
    return float(np.sum(p * np.log(p / q)))


def tsne_embed(
    features,
    dims=3,
    seed=0,
    perplexity=None,
    n_iter=1000,
    learning_rate=200.0,
    early_exaggeration=12.0,
    exaggeration_iters=250,
    init="pca",
    return_result=False,
):
    """Exact (O(M^2)) t-SNE embedding of monthly feature vectors.

    Deterministic given ``seed`` (the default PCA initialization makes the
    whole descent deterministic; the seed drives ``init='random'``).
    Returns an (M, dims) array, or a TsneResult carrying the KL divergence
    of the initial and final layouts when ``return_result`` is True.
    """
    if isinstance(features, np.ndarray):
        X = np.asarray(features, dtype=np.float64)
    else:
        X = feature_matrix(features)
    m = X.shape[0]
    if m < 4:
        raise ConfigError(f"t-SNE needs at least 4 points, got {m}")
    bound = (m - 1) / 3.0
    if perplexity is None:
        perplexity = min(30.0, bound)
    if perplexity <= 0 or perplexity > bound:
        raise ConfigError(
            f"perplexity {perplexity} infeasible for {m} points (must be in (0, {bound:.3f}])"
        )

    p = _joint_probabilities(_pairwise_sq_dists(X), perplexity)

    if init == "pca":
        model = fit_pca(X)
        comps = model.transform(X)[:, :dims]
        if comps.shape[1] < dims:
            comps = np.hstack([comps, np.zeros((m, dims - comps.shape[1]))])
        scale = comps[:, 0].std()
        y = comps * (1e-4 / scale) if scale > 0 else comps
    elif init == "random":
        y = np.random.default_rng(seed).normal(scale=1e-4, size=(m, dims))
    else:
        raise ConfigError(f"unknown t-SNE init {init!r}")

    q, _ = _lowdim_affinities(y)
    kl_initial = _kl(p, q)

    # exact duplicate rows share identical conditionals and identical PCA
    # starts, so their true trajectories coincide; pin each group to its
    # first member so summation-order noise cannot split them (random
    # starts are not shared, so no pinning there)
    if init == "pca":
        _, group_of = np.unique(X, axis=0, return_inverse=True)
        rep = np.full(group_of.max() + 1, -1, dtype=np.int64)
        for i, g in enumerate(group_of):
            if rep[g] < 0:
                rep[g] = i
        tie_rows = rep[group_of]
    else:
        tie_rows = np.arange(m)

    update = np.zeros_like(y)
    gains = np.ones_like(y)
    for it in range(n_iter):
        momentum = 0.5 if it < exaggeration_iters else 0.8
        p_eff = p * early_exaggeration if it < exaggeration_iters else p
        q, num = _lowdim_affinities(y)
        # gradient: 4 * sum_j (p_ij - q_ij) (y_i - y_j) / (1 + |y_i - y_j|^2)
        pq = (p_eff - q) * num
        grad = 4.0 * ((np.diag(pq.sum(axis=1)) - pq) @ y)
        grad = grad[tie_rows]
        same_sign = np.sign(grad) == np.sign(update)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.clip(gains, 0.01, None, out=gains)
        update = momentum * update - learning_rate * gains * grad
        y = y + update
        y = y - y.mean(axis=0)

    q, _ = _lowdim_affinities(y)
    kl_final = _kl(p, q)
    result = TsneResult(embedding=y, kl_initial=kl_initial, kl_final=kl_final)
    return result if return_result else result.embedding


# ----------------------------------------------------------------------
# PCA scores -> standardized weights
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class PcaFirstResult:
    scores: np.ndarray
    explained_ratio: np.ndarray
    n_components_at_threshold: int


def pca_first(vectors, var_threshold=0.90):
    """Scores on the first principal component of the (centered) rows.

    The threshold is informational: even when several components are
    needed to reach it, only the first component's scores are returned.
    """
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValidationError("pca_first needs a 2-D matrix with at least 2 rows")
    model = fit_pca(X)
    if model.explained_ratio.sum() <= 0:
        raise DegenerateInput("pca_first: input has zero total variance")
    scores = model.transform(X)[:, 0]
    return PcaFirstResult(
        scores=scores,
        explained_ratio=model.explained_ratio,
        n_components_at_threshold=components_for_threshold(model.explained_ratio, var_threshold),
    )


def minmax_standardize(values):
    """Affine map of values onto [0, 1]; constant input is an error."""
    w = np.asarray(values, dtype=np.float64)
    lo, hi = w.min(), w.max()
    if hi <= lo:
        raise DegenerateInput("min-max standardization undefined for constant input")
    return (w - lo) / (hi - lo)


def finalize_weights(w_std, epsilon=DEFAULT_EPSILON):
    """Shift standardized weights by the positive floor epsilon."""
    w = np.asarray(w_std, dtype=np.float64)
    if np.any(w < 0) or np.any(w > 1):
        raise ValidationError("standardized weights must lie in [0, 1]")
    return w + epsilon


@dataclass(frozen=True)
class WeightSeries:
    """Per-month weights plus their hourly expansion rule.

    Invariants: every weight >= epsilon, the minimum equals epsilon and
    the maximum equals 1 + epsilon (the image of a min-max standardized
    score vector shifted by epsilon).
    """

    months: tuple
    monthly: np.ndarray
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        months = tuple(int(m) for m in self.months)
        monthly = np.asarray(self.monthly, dtype=np.float64)
        if len(months) != monthly.size:
            raise ValidationError("months and monthly weights must have equal length")
        if len(set(months)) != len(months):
            raise ValidationError("duplicate months in weight series")
        eps = float(self.epsilon)
        if np.any(monthly < eps):
            raise ValidationError("every monthly weight must be >= epsilon")
        if not np.isclose(monthly.min(), eps, rtol=0.0, atol=1e-12):
            raise ValidationError("minimum monthly weight must equal epsilon")
        if not np.isclose(monthly.max(), 1.0 + eps, rtol=0.0, atol=1e-12):
            raise ValidationError("maximum monthly weight must equal 1 + epsilon")
        monthly = monthly.copy()
        monthly.setflags(write=False)
        object.__setattr__(self, "months", months)
        object.__setattr__(self, "monthly", monthly)
        object.__setattr__(self, "epsilon", eps)

    def as_mapping(self):
        return dict(zip(self.months, self.monthly))

    def hourly(self, terms):
        return expand_hourly(self, terms)


def expand_hourly(weights, terms):
    """Piecewise-constant hourly weights over the in-term hours.

    ``weights`` is a WeightSeries or a {month_counter: weight} mapping.
    Raises ConfigError when a term hour's month has no weight.
    """
    mapping = weights.as_mapping() if isinstance(weights, WeightSeries) else dict(weights)
    hours = terms.hours
    months = month_index(hours)
    out = np.empty(hours.size, dtype=np.float64)
    for i, m in enumerate(months):
        try:
            out[i] = mapping[int(m)]
        except KeyError:
            raise ConfigError(f"no monthly weight for {month_label(m)}") from None
    return out


@dataclass(frozen=True)
class WeightResult:
    """Everything the weight pipeline produces, for reports and audit."""

    weights: WeightSeries
    embedding: np.ndarray
    scores: np.ndarray
    explained_ratio: np.ndarray
    kl_initial: float
    kl_final: float


def derive_weights(
    features,
    seed=0,
    perplexity=None,
    epsilon=DEFAULT_EPSILON,
    var_threshold=0.90,
    **tsne_kwargs,
):
    """Run the full monthly-feature -> weight pipeline."""
    features = list(features)
    months = tuple(f.month for f in features)
    tsne = tsne_embed(features, dims=3, seed=seed, perplexity=perplexity,
                      return_result=True, **tsne_kwargs)
    first = pca_first(tsne.embedding, var_threshold=var_threshold)
    monthly = finalize_weights(minmax_standardize(first.scores), epsilon=epsilon)
    weights = WeightSeries(months=months, monthly=monthly, epsilon=epsilon)
    return WeightResult(
        weights=weights,
        embedding=tsne.embedding,
        scores=first.scores,
        explained_ratio=first.explained_ratio,
        kl_initial=tsne.kl_initial,
        kl_final=tsne.kl_final,
    )


def silhouette(points, labels):
    """Mean silhouette coefficient of a labelled point cloud.

    Reported for cluster-quality audit of the flood / non-flood month
    grouping; singleton clusters contribute 0 by convention.
    """
    points = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels)
    uniq = np.unique(labels)
    if uniq.size < 2:
        raise DegenerateInput("silhouette needs at least two clusters")
    d = np.sqrt(_pairwise_sq_dists(points))
    scores = np.zeros(points.shape[0])
    for i in range(points.shape[0]):
        same = labels == labels[i]
        n_same = same.sum()
        if n_same <= 1:
            scores[i] = 0.0
            continue
        a = d[i, same].sum() / (n_same - 1)
        b = min(d[i, labels == u].mean() for u in uniq if u != labels[i])
        denom = max(a, b)
        scores[i] = 0.0 if denom == 0 else (b - a) / denom
    return float(scores.mean())
