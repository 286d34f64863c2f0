"""Dam-inflow forecasting with l2-normalized ensembles and ocean-feature weights."""

from .dataset import Dataset, GuidanceSeries, YearData
from .ensemble import (
    CoefficientSet,
    ModelOutput,
    batch_ensemble,
    global_ensemble,
    l2_norm,
    median_sigma_coeffs,
)
from .metrics import check_proposition1, fcd, mae, mse, rmse, sim, skill_report
from .sstweights import (
    MonthlyFeature,
    WeightSeries,
    derive_weights,
    expand_hourly,
    finalize_weights,
    minmax_standardize,
    pca_first,
    tsne_embed,
)
from .synth import ScenarioSpec, gen_dataset
from .timeseries import DesignMatrix, FloodTerm, FloodTermSet, HydroSeries, align, slice_terms

__version__ = "0.1.0"

__all__ = [
    "CoefficientSet",
    "Dataset",
    "DesignMatrix",
    "FloodTerm",
    "FloodTermSet",
    "GuidanceSeries",
    "HydroSeries",
    "ModelOutput",
    "MonthlyFeature",
    "ScenarioSpec",
    "WeightSeries",
    "YearData",
    "align",
    "batch_ensemble",
    "check_proposition1",
    "derive_weights",
    "expand_hourly",
    "fcd",
    "finalize_weights",
    "gen_dataset",
    "global_ensemble",
    "l2_norm",
    "mae",
    "median_sigma_coeffs",
    "minmax_standardize",
    "mse",
    "pca_first",
    "rmse",
    "sim",
    "skill_report",
    "slice_terms",
    "tsne_embed",
]
