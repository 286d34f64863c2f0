"""Regression forest on weighted bootstrap resamples with out-of-bag error.

Sample weights enter through the bootstrap only: each tree draws N rows
with probability proportional to w, so zero-weight rows never appear in
bag.  Every tree records its out-of-bag rows; the forest reports the
weighted OOB mean squared error and supports permutation importance
against it.  Leaves keep their in-bag sample lists, which also enables
conditional-quantile prediction.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from .base import FittedModel, check_training_inputs, weight_fingerprint


@dataclass(frozen=True)
class ForestSpec:
    min_leaf_size: int = 5
    n_trees: int = 100
    seed: int = 0
    max_features: int | None = None  # None = every column at every split

    def __post_init__(self):
        if self.min_leaf_size < 1:
            raise ValidationError("min leaf size must be >= 1")
        if self.n_trees < 1:
            raise ValidationError("number of trees must be >= 1")
        if self.max_features is not None and self.max_features < 1:
            raise ValidationError("max features must be >= 1 when set")


class Tree:
    """Flat-array CART regression tree (feature == -1 marks a leaf)."""

    __slots__ = ("feature", "threshold", "left", "right", "value", "leaf_rows")

    def __init__(self, feature, threshold, left, right, value, leaf_rows):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.value = value
        self.leaf_rows = leaf_rows  # per-node (rows, counts) or None

    @property
    def n_nodes(self):
        return self.feature.size

    def leaf_of(self, X):
        """Leaf node index per row of X (vectorized descent)."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] >= 0
        while np.any(active):
            idx = np.flatnonzero(active)
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] >= 0
        return node

    def predict(self, X):
        return self.value[self.leaf_of(X)]


def _grow_tree(X, y, rows, counts, min_leaf, max_features, rng):
    """Grow one CART tree on the (rows, counts) bootstrap multiset."""
    feature, threshold, left, right, value, leaf_rows = [], [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        leaf_rows.append(None)
        return len(feature) - 1

    stack = [(new_node(), rows, counts)]
    n_features = X.shape[1]
    while stack:
        node, nrows, ncnt = stack.pop()
        wsum = ncnt.sum()
        yn = y[nrows]
        mean = float(ncnt @ yn / wsum)
        value[node] = mean
        split = None
        if wsum >= 2 * min_leaf and nrows.size >= 2 and not np.all(yn == yn[0]):
            if max_features is not None and max_features < n_features:
                feats = np.sort(rng.choice(n_features, size=max_features, replace=False))
            else:
                feats = np.arange(n_features)
            split = _best_split(X, yn, nrows, ncnt, feats, min_leaf)
        if split is None:
            value[node] = mean
            leaf_rows[node] = (nrows, ncnt)
            continue
        feat, thr = split
        go_left = X[nrows, feat] <= thr
        feature[node] = int(feat)
        threshold[node] = float(thr)
        left_id, right_id = new_node(), new_node()
        left[node] = left_id
        right[node] = right_id
        stack.append((right_id, nrows[~go_left], ncnt[~go_left]))
        stack.append((left_id, nrows[go_left], ncnt[go_left]))

    return Tree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        value=np.asarray(value, dtype=np.float64),
        leaf_rows=leaf_rows,
    )


def _best_split(X, yn, nrows, ncnt, feats, min_leaf):
    """Best (feature, threshold) by count-weighted SSE, or None."""
    xn = X[np.ix_(nrows, feats)]
    order = np.argsort(xn, axis=0, kind="stable")
    xs = np.take_along_axis(xn, order, axis=0)
    ys = yn[order]
    cs = ncnt[order].astype(np.float64)

    cw = np.cumsum(cs, axis=0)
    cwy = np.cumsum(cs * ys, axis=0)
    cwy2 = np.cumsum(cs * ys * ys, axis=0)
    total_w, total_y, total_y2 = cw[-1], cwy[-1], cwy2[-1]

    lw, ly, ly2 = cw[:-1], cwy[:-1], cwy2[:-1]
    rw, ry, ry2 = total_w - lw, total_y - ly, total_y2 - ly2
    ok = (xs[1:] > xs[:-1]) & (lw >= min_leaf) & (rw >= min_leaf)
    if not np.any(ok):
        return None
    with np.errstate(invalid="ignore", divide="ignore"):
        sse = (ly2 - ly * ly / lw) + (ry2 - ry * ry / rw)
    sse = np.where(ok, sse, np.inf)
    pos, col = np.unravel_index(np.argmin(sse), sse.shape)
    if not np.isfinite(sse[pos, col]):
        return None
    lo, hi = xs[pos, col], xs[pos + 1, col]
    thr = lo + (hi - lo) / 2.0
    if thr >= hi:  # midpoint rounded up to the upper value; fall back
        thr = lo
    return int(feats[col]), float(thr)


class ForestModel(FittedModel):
    kind = "rfoob"

    def __init__(self, spec, trees, in_bag_counts, oob_prediction, oob_mse,
                 schema, fingerprint, train_y=None):
        super().__init__(schema, fingerprint)
        self.spec = spec
        self.trees = trees
        self.in_bag_counts = in_bag_counts  # (n_trees, n_train)
        self.oob_prediction = oob_prediction
        self.oob_mse = oob_mse
        self.train_y = train_y
        self._n_features = None

    @property
    def n_features(self):
        return self._n_features

    def _predict(self, X):
        acc = np.zeros(X.shape[0])
        for tree in self.trees:
            acc += tree.predict(X)
        return acc / len(self.trees)

    def tree_predictions(self, X):
        """(n_trees, n_rows) matrix of per-tree predictions."""
        X = np.asarray(X, dtype=np.float64)
        return np.vstack([tree.predict(X) for tree in self.trees])

    def predict_quantile(self, X, q):
        """Conditional quantile from pooled leaf samples across trees.

        Exposed for exploratory use; the forecasting pipeline only ever
        consumes the conditional mean.
        """
        X = np.asarray(X, dtype=np.float64)
        if self.train_y is None:
            raise ValidationError("quantile prediction needs the stored training targets")
        n_train = self.train_y.size
        out = np.empty(X.shape[0])
        weights = np.zeros((X.shape[0], n_train))
        for tree in self.trees:
            leaves = tree.leaf_of(X)
            for leaf in np.unique(leaves):
                rows, counts = tree.leaf_rows[leaf]
                rows_x = leaves == leaf
                contrib = np.zeros(n_train)
                contrib[rows] = counts / counts.sum()
                weights[rows_x] += contrib
        weights /= len(self.trees)
        order = np.argsort(self.train_y)
        sorted_y = self.train_y[order]
        for i in range(X.shape[0]):
            cdf = np.cumsum(weights[i, order])
            out[i] = sorted_y[np.searchsorted(cdf, q * cdf[-1], side="left").clip(0, n_train - 1)]
        return out


def fit_forest(X, y, w, spec, column_names=None):
    """Fit the forest; deterministic given spec.seed (tree i uses seed+i)."""
    X, y, w = check_training_inputs(X, y, w)
    n = X.shape[0]
    prob = w / w.sum()

    trees = []
    in_bag_counts = np.zeros((spec.n_trees, n), dtype=np.int32)
    oob_sum = np.zeros(n)
    oob_n = np.zeros(n, dtype=np.int64)
    for t in range(spec.n_trees):
        rng = np.random.default_rng(spec.seed + t)
        draw = rng.choice(n, size=n, replace=True, p=prob)
        counts = np.bincount(draw, minlength=n)
        in_bag_counts[t] = counts
        rows = np.flatnonzero(counts)
        tree = _grow_tree(X, y, rows, counts[rows].astype(np.float64),
                          spec.min_leaf_size, spec.max_features, rng)
        trees.append(tree)
        oob = np.flatnonzero(counts == 0)
        if oob.size:
            oob_sum[oob] += tree.predict(X[oob])
            oob_n[oob] += 1

    covered = oob_n > 0
    if not np.all(covered):
        warnings.warn(
            f"{int((~covered).sum())} rows are out-of-bag in no tree; "
            "they are excluded from the OOB error",
            stacklevel=2,
        )
    oob_prediction = np.full(n, np.nan)
    oob_prediction[covered] = oob_sum[covered] / oob_n[covered]
    use = covered & (w > 0)
    if np.any(use):
        oob_mse = float(np.sum(w[use] * (oob_prediction[use] - y[use]) ** 2) / np.sum(w[use]))
    else:
        oob_mse = np.nan

    model = ForestModel(
        spec=spec,
        trees=trees,
        in_bag_counts=in_bag_counts,
        oob_prediction=oob_prediction,
        oob_mse=oob_mse,
        schema=column_names,
        fingerprint=weight_fingerprint(w),
        train_y=y.copy(),
    )
    model._n_features = X.shape[1]
    return model


@dataclass(frozen=True)
class ImportanceResult:
    names: tuple
    raw: np.ndarray  # mean OOB-MSE increase per permuted column
    importance: np.ndarray  # raw floored at zero, for reporting
    baseline_oob_mse: float
    n_repeats: int


def oob_importance(model, X, y, w=None, n_repeats=4, seed=0, column_names=None):
    """Permutation predictor importance against the weighted OOB error.

    importance_j is the mean increase of the OOB MSE over n_repeats
    column-j permutations; deterministic given the seed.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    w = np.ones(n) if w is None else np.asarray(w, dtype=np.float64)
    if model.in_bag_counts.shape[1] != n:
        raise ValidationError("importance inputs must be the forest's training rows")

    oob_rows = [np.flatnonzero(model.in_bag_counts[t] == 0) for t in range(len(model.trees))]

    def oob_mse_for(Xm):
        total = np.zeros(n)
        hits = np.zeros(n, dtype=np.int64)
        for tree, rows in zip(model.trees, oob_rows):
            if rows.size:
                total[rows] += tree.predict(Xm[rows])
                hits[rows] += 1
        use = (hits > 0) & (w > 0)
        pred = total[use] / hits[use]
        return float(np.sum(w[use] * (pred - y[use]) ** 2) / np.sum(w[use]))

    baseline = oob_mse_for(X)
    rng = np.random.default_rng(seed)
    raw = np.zeros(X.shape[1])
    for j in range(X.shape[1]):
        Xp = X.copy()
        bumps = []
        for _ in range(n_repeats):
            Xp[:, j] = X[rng.permutation(n), j]
            bumps.append(oob_mse_for(Xp) - baseline)
        raw[j] = float(np.mean(bumps))

    names = tuple(column_names) if column_names is not None else tuple(
        f"x{j}" for j in range(X.shape[1])
    )
    return ImportanceResult(
        names=names,
        raw=raw,
        importance=np.maximum(raw, 0.0),
        baseline_oob_mse=baseline,
        n_repeats=n_repeats,
    )
