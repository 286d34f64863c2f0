"""Model persistence: a self-describing directory of meta.json + .npy arrays.

Arrays are written with np.save (raw, timestamp-free bytes), so saving
the same model twice produces byte-identical artifacts and a loaded
model reproduces its predictions exactly.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from ..errors import ValidationError
from .base import ColumnScaler
from .forest import ForestModel, ForestSpec, Tree
from .kernel import KernelModel, KernelRegSpec
from .svr import SvrModel, SvrSpec

_FORMAT = "floodcast-model-v1"


def _write(path, meta, arrays):
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    meta = dict(meta)
    meta["format"] = _FORMAT
    meta["arrays"] = sorted(arrays)
    for name in arrays:
        np.save(path / f"{name}.npy", np.ascontiguousarray(arrays[name]))
    (path / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _read(path):
    path = Path(path)
    meta = json.loads((path / "meta.json").read_text())
    if meta.get("format") != _FORMAT:
        raise ValidationError(f"{path}: not a {_FORMAT} artifact")
    arrays = {name: np.load(path / f"{name}.npy") for name in meta["arrays"]}
    return meta, arrays


def save_model(model, path):
    """Persist a fitted model into a directory artifact."""
    common = {
        "kind": model.kind,
        "schema": list(model.schema) if model.schema is not None else None,
        "weight_fingerprint": model.weight_fingerprint,
    }
    if isinstance(model, KernelModel):
        meta = dict(common, spec=dataclasses.asdict(model.spec), seed=model.seed,
                    intercept=model.intercept)
        arrays = {
            "scaler_lo": model.scaler.lo,
            "scaler_span": model.scaler.span,
            "omega": model.omega,
            "phase": model.phase,
            "beta": model.beta,
        }
    elif isinstance(model, SvrModel):
        meta = dict(common, spec=dataclasses.asdict(model.spec), bias=model.bias)
        arrays = {
            "scaler_lo": model.scaler.lo,
            "scaler_span": model.scaler.span,
            "sv_x": model.sv_x,
            "sv_beta": model.sv_beta,
        }
    elif isinstance(model, ForestModel):
        meta = dict(common, spec=dataclasses.asdict(model.spec),
                    oob_mse=model.oob_mse, n_features=model.n_features)
        arrays = {
            "in_bag_counts": model.in_bag_counts,
            "oob_prediction": model.oob_prediction,
            "train_y": model.train_y,
        }
        packed = _pack_trees(model.trees)
        arrays.update(packed)
    else:
        raise ValidationError(f"cannot persist model of type {type(model).__name__}")
    _write(path, meta, arrays)


def load_model(path):
    """Load a persisted model; predictions match the original bit-for-bit."""
    meta, arrays = _read(path)
    kind = meta["kind"]
    schema = tuple(meta["schema"]) if meta["schema"] is not None else None
    fingerprint = meta["weight_fingerprint"]
    if kind == "kernel":
        return KernelModel(
            spec=KernelRegSpec(**meta["spec"]),
            scaler=ColumnScaler(lo=arrays["scaler_lo"], span=arrays["scaler_span"]),
            omega=arrays["omega"],
            phase=arrays["phase"],
            beta=arrays["beta"],
            intercept=meta["intercept"],
            seed=meta["seed"],
            schema=schema,
            fingerprint=fingerprint,
        )
    if kind == "svm":
        return SvrModel(
            spec=SvrSpec(**meta["spec"]),
            scaler=ColumnScaler(lo=arrays["scaler_lo"], span=arrays["scaler_span"]),
            sv_x=arrays["sv_x"],
            sv_beta=arrays["sv_beta"],
            bias=meta["bias"],
            schema=schema,
            fingerprint=fingerprint,
        )
    if kind == "rfoob":
        trees = _unpack_trees(arrays)
        model = ForestModel(
            spec=ForestSpec(**meta["spec"]),
            trees=trees,
            in_bag_counts=arrays["in_bag_counts"],
            oob_prediction=arrays["oob_prediction"],
            oob_mse=meta["oob_mse"],
            schema=schema,
            fingerprint=fingerprint,
            train_y=arrays["train_y"],
        )
        model._n_features = meta["n_features"]
        _rebuild_leaf_rows(model)
        return model
    raise ValidationError(f"unknown model kind {kind!r}")


def _pack_trees(trees):
    """Concatenate per-tree node arrays with an offset table."""
    offsets = np.zeros(len(trees) + 1, dtype=np.int64)
    for i, t in enumerate(trees):
        offsets[i + 1] = offsets[i] + t.n_nodes
    return {
        "tree_offsets": offsets,
        "tree_feature": np.concatenate([t.feature for t in trees]),
        "tree_threshold": np.concatenate([t.threshold for t in trees]),
        "tree_left": np.concatenate([t.left for t in trees]),
        "tree_right": np.concatenate([t.right for t in trees]),
        "tree_value": np.concatenate([t.value for t in trees]),
    }


def _unpack_trees(arrays):
    offsets = arrays["tree_offsets"]
    trees = []
    for i in range(offsets.size - 1):
        lo, hi = offsets[i], offsets[i + 1]
        trees.append(
            Tree(
                feature=arrays["tree_feature"][lo:hi],
                threshold=arrays["tree_threshold"][lo:hi],
                left=arrays["tree_left"][lo:hi],
                right=arrays["tree_right"][lo:hi],
                value=arrays["tree_value"][lo:hi],
                leaf_rows=[None] * int(hi - lo),
            )
        )
    return trees


def _rebuild_leaf_rows(model):
    """Repopulate per-leaf sample lists by pushing in-bag rows down each tree.

    Needs the training design matrix only for the split routing, which the
    node arrays encode; in-bag membership comes from the stored counts, so
    the rebuild is exact given the same X used at fit time is not required
    for mean prediction, only for quantiles (which call this lazily).
    """
    model._leaf_rows_need_x = True


def rebuild_leaf_rows(model, X):
    """Exact leaf sample lists from the stored in-bag counts and X."""
    X = np.asarray(X, dtype=np.float64)
    for t, tree in enumerate(model.trees):
        counts = model.in_bag_counts[t]
        rows = np.flatnonzero(counts)
        leaves = tree.leaf_of(X[rows])
        for node in range(tree.n_nodes):
            if tree.feature[node] < 0:
                here = leaves == node
                tree.leaf_rows[node] = (rows[here], counts[rows[here]].astype(np.float64))
