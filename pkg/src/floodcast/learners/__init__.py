"""Weighted base regressors and their tuner."""

from .base import ColumnScaler, FittedModel, weight_fingerprint
from .forest import ForestModel, ForestSpec, fit_forest, oob_importance
from .kernel import KernelModel, KernelRegSpec, fit_kernel
from .persist import load_model, save_model
from .svr import SvrModel, SvrSpec, fit_svr
from .tuning import TuneResult, tune

__all__ = [
    "ColumnScaler",
    "FittedModel",
    "ForestModel",
    "ForestSpec",
    "KernelModel",
    "KernelRegSpec",
    "SvrModel",
    "SvrSpec",
    "TuneResult",
    "fit_forest",
    "fit_kernel",
    "fit_svr",
    "load_model",
    "oob_importance",
    "predict",
    "save_model",
    "tune",
    "weight_fingerprint",
]


def predict(model, X, column_names=None):
    """Predict with any fitted model, enforcing the training schema."""
    return model.predict(X, column_names=column_names)
