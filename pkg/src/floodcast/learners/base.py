"""Shared learner plumbing: schema checks, input scaling, fingerprints."""

from __future__ import annotations

import hashlib
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from ..errors import SchemaError, ValidationError


def check_training_inputs(X, y, w):
    """Validate and convert the (X, y, w) triple every fitter receives."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if X.ndim != 2:
        raise ValidationError(f"X must be 2-D, got shape {X.shape}")
    n = X.shape[0]
    if y.shape != (n,) or w.shape != (n,):
        raise ValidationError("y and w must have one entry per row of X")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y)) and np.all(np.isfinite(w))):
        raise ValidationError("training inputs must be finite")
    if np.any(w < 0):
        raise ValidationError("sample weights must be nonnegative")
    if not np.any(w > 0):
        raise ValidationError("at least one sample weight must be positive")
    return X, y, w


def weight_fingerprint(w):
    """Short stable digest of the training weight vector."""
    w = np.ascontiguousarray(np.asarray(w, dtype=np.float64))
    return hashlib.sha256(w.tobytes()).hexdigest()[:16]


@dataclass(frozen=True)
class ColumnScaler:
    """Per-column min-max map onto [0, 1], frozen from the training data.

    Constant training columns map to 0 so the scaled dot products stay
    nonnegative (needed by the real-exponent polynomial kernel).
    """

    lo: np.ndarray
    span: np.ndarray

    @classmethod
    def fit(cls, X):
        X = np.asarray(X, dtype=np.float64)
        lo = X.min(axis=0)
        span = X.max(axis=0) - lo
        return cls(lo=lo, span=span)

    def transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        with np.errstate(invalid="ignore", divide="ignore"):
            scaled = (X - self.lo) / self.span
        scaled[:, self.span == 0] = 0.0
        return np.clip(scaled, 0.0, 1.0)


class FittedModel(ABC):
    """A trained regressor bound to its training column schema."""

    kind: str = "base"

    def __init__(self, schema, fingerprint):
        self.schema = tuple(schema) if schema is not None else None
        self.weight_fingerprint = fingerprint

    def predict(self, X, column_names=None):
        """Finite predictions, one per row of X; SchemaError on mismatch."""
        if column_names is not None and self.schema is not None:
            names = tuple(column_names)
            if names != self.schema:
                raise SchemaError(
                    f"{self.kind}: prediction columns {names} do not match "
                    f"training schema {self.schema}"
                )
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise SchemaError(f"{self.kind}: prediction input must be 2-D, got {X.shape}")
        if self.n_features is not None and X.shape[1] != self.n_features:
            raise SchemaError(
                f"{self.kind}: expected {self.n_features} columns, got {X.shape[1]}"
            )
        if X.shape[0] == 0:
            return np.empty(0)
        return self._predict(X)

    @property
    @abstractmethod
    def n_features(self):
        ...

    @abstractmethod
    def _predict(self, X):
        ...
