"""Experiment configuration: YAML file -> validated ExperimentConfig.

One structured file drives everything; only the output/data paths and the
root seed may be overridden from the environment (FLOODCAST_OUT_DIR,
FLOODCAST_DATA_DIR, FLOODCAST_SEED).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError
from .learners import ForestSpec, KernelRegSpec, SvrSpec
from .synth import ScenarioSpec

ENSEMBLE_VARIANTS = ("global", "median_sigma", "batch")
WEIGHT_MODES = ("on", "off", "both")

# ordered predictor recipe: every transform of the default feature set
DEFAULT_RECIPE = (
    {"source": "inflow", "transform": "ar"},
    {"source": "water_height", "transform": "ar"},
    {"source": "vp_1", "transform": "ar"},
    {"source": "vp_2", "transform": "ar"},
    {"source": "inflow", "transform": "ma"},
    {"source": "water_height", "transform": "ma"},
    {"source": "gauge_1", "transform": "ma"},
    {"source": "gauge_2", "transform": "ma"},
    {"source": "gauge_3", "transform": "ma"},
    {"source": "gauge_4", "transform": "ma"},
    {"source": "gauge_5", "transform": "ma"},
    {"source": "vp_1", "transform": "ma"},
    {"source": "vp_2", "transform": "ma"},
    {"source": "sea_temp", "transform": "embedding"},
    {"source": "coast_temp_1", "transform": "raw"},
    {"source": "coast_temp_2", "transform": "raw"},
    {"source": "coast_temp_3", "transform": "raw"},
    {"source": "wind_1", "transform": "raw"},
    {"source": "wind_2", "transform": "raw"},
    {"source": "wind_3", "transform": "raw"},
    {"source": "vp_1", "transform": "raw"},
    {"source": "vp_2", "transform": "raw"},
    {"source": "calendar", "transform": "seasonal_dummies"},
    {"source": "guidance", "transform": "pca"},
    {"source": "grid", "transform": "moments"},
    {"source": "inflow", "transform": "gradient"},
    {"source": "water_height", "transform": "gradient"},
    {"source": "gauge_1", "transform": "gradient"},
    {"source": "gauge_2", "transform": "gradient"},
    {"source": "gauge_3", "transform": "gradient"},
    {"source": "gauge_4", "transform": "gradient"},
    {"source": "gauge_5", "transform": "gradient"},
    {"source": "grid", "transform": "accum_pca"},
)

KNOWN_TRANSFORMS = (
    "ar", "ma", "raw", "gradient", "moments", "accum_pca", "pca",
    "seasonal_dummies", "embedding",
)


@dataclass(frozen=True)
class FeatureParams:
    recipe: tuple = DEFAULT_RECIPE
    ar_order: int = 8
    gradient_window: int = 12
    gradient_mode: str = "least_squares"
    accum_horizon: int = 6
    accum_threshold: float = 0.85
    accum_max_components: int = 16
    guidance_threshold: float = 0.90


@dataclass(frozen=True)
class LearnerParams:
    kernel_spec: KernelRegSpec = KernelRegSpec()
    forest_spec: ForestSpec = ForestSpec()
    svm_spec: SvrSpec = SvrSpec()
    kernel_budget: int = 1
    forest_budget: int = 1
    svm_budget: int = 1
    kernel_space: dict = field(default_factory=dict)
    forest_space: dict = field(default_factory=dict)
    svm_space: dict = field(default_factory=dict)
    tuner_method: str = "random"
    n_folds: int = 3


@dataclass(frozen=True)
class EnsembleParams:
    variant: str = "batch"
    coefficients_path: str | None = None  # term_id,model,alpha CSV
    global_coefficients: tuple = (1 / 3, 1 / 3, 1 / 3)
    oracle_grid_step: float | None = None


@dataclass(frozen=True)
class WeightParams:
    mode: str = "on"
    epsilon: float = 1e-8
    perplexity: float | None = None
    tsne_seed: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    source: str = "synth"  # "synth" | "dir"
    data_dir: str | None = None
    scenario: ScenarioSpec = ScenarioSpec()
    train_years: tuple | None = None  # default: scenario convention
    test_year: int | None = None
    lead_time: int = 6
    weights: WeightParams = WeightParams()
    features: FeatureParams = FeatureParams()
    learners: LearnerParams = LearnerParams()
    ensemble: EnsembleParams = EnsembleParams()
    seed: int = 0
    output_dir: str = "runs/out"
    importance_repeats: int = 3
    render_figures: bool = True

    def __post_init__(self):
        if self.source not in ("synth", "dir"):
            raise ConfigError(f"unknown data source {self.source!r}")
        if self.source == "dir":
            if not self.data_dir:
                raise ConfigError("data source 'dir' needs data_dir")
            if not Path(self.data_dir).exists():
                raise ConfigError(f"data_dir {self.data_dir!r} does not exist")
        if self.ensemble.coefficients_path and not Path(self.ensemble.coefficients_path).exists():
            raise ConfigError(
                f"coefficients file {self.ensemble.coefficients_path!r} does not exist"
            )
        if self.weights.mode not in WEIGHT_MODES:
            raise ConfigError(f"weights mode must be one of {WEIGHT_MODES}")
        if self.ensemble.variant not in ENSEMBLE_VARIANTS:
            raise ConfigError(f"ensemble variant must be one of {ENSEMBLE_VARIANTS}")
        if self.lead_time < 0:
            raise ConfigError("lead time must be nonnegative")
        for item in self.features.recipe:
            if item.get("transform") not in KNOWN_TRANSFORMS:
                raise ConfigError(f"unknown feature transform in recipe: {item}")
        if self.train_years is not None and self.test_year is not None:
            if self.test_year in self.train_years:
                raise ConfigError("train and test years must be disjoint")

    def resolved_split(self):
        train = self.train_years if self.train_years is not None else self.scenario.train_years
        test = self.test_year if self.test_year is not None else self.scenario.test_year
        if test in train:
            raise ConfigError("train and test years must be disjoint")
        return tuple(train), test


def _search_space(raw):
    """{'lam': {'log': [1e-6, 1]}, 'kernel': {'choice': [...]}} -> dims."""
    space = {}
    for name, dim in (raw or {}).items():
        if not isinstance(dim, dict) or len(dim) != 1:
            raise ConfigError(f"search dimension {name!r} must be a single-kind mapping")
        kind, args = next(iter(dim.items()))
        if kind == "choice":
            space[name] = ("choice", list(args))
        elif kind in ("uniform", "log", "int"):
            lo, hi = args
            space[name] = (kind, lo, hi)
        else:
            raise ConfigError(f"unknown search dimension kind {kind!r}")
    return space


def _spec_from(raw, cls, defaults):
    kwargs = dict(defaults)
    kwargs.update(raw or {})
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad {cls.__name__} parameters: {exc}") from None


def load_config(path=None, overrides=None):
    """Load YAML config (or defaults when path is None), apply env overrides."""
    raw = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file {path} does not exist")
        raw = yaml.safe_load(path.read_text()) or {}
    if overrides:
        raw = _deep_merge(raw, overrides)

    data = raw.get("data", {})
    scenario = _spec_from(data.get("scenario"), ScenarioSpec, {})
    split = raw.get("split", {})

    wdata = dict(raw.get("weights") or {})
    if isinstance(wdata.get("mode"), bool):  # YAML 1.1 reads bare on/off as booleans
        wdata["mode"] = "on" if wdata["mode"] else "off"
    weights = _spec_from(wdata, WeightParams, {})
    fdata = dict(raw.get("features") or {})
    recipe = fdata.pop("recipe", None)
    if recipe in (None, "default"):
        fdata["recipe"] = DEFAULT_RECIPE
    else:
        fdata["recipe"] = tuple(dict(item) for item in recipe)
    features = _spec_from(fdata, FeatureParams, {})

    ldata = dict(raw.get("learners") or {})
    lkw = {}
    for name, cls, key in (
        ("kernel", KernelRegSpec, "kernel"),
        ("forest", ForestSpec, "rfoob"),
        ("svm", SvrSpec, "svm"),
    ):
        sub = dict(ldata.get(key) or ldata.get(name) or {})
        lkw[f"{name}_spec"] = _spec_from(sub.get("spec"), cls, {})
        lkw[f"{name}_budget"] = int(sub.get("budget", 1))
        lkw[f"{name}_space"] = _search_space(sub.get("space"))
    tuner = ldata.get("tuner") or {}
    lkw["tuner_method"] = tuner.get("method", "random")
    lkw["n_folds"] = int(tuner.get("n_folds", 3))
    learners = LearnerParams(**lkw)

    edata = raw.get("ensemble") or {}
    ensemble = EnsembleParams(
        variant=edata.get("variant", "batch"),
        coefficients_path=edata.get("coefficients"),
        global_coefficients=tuple(edata.get("global_coefficients", (1 / 3, 1 / 3, 1 / 3))),
        oracle_grid_step=edata.get("oracle_grid_step"),
    )

    cfg = ExperimentConfig(
        source=data.get("source", "synth"),
        data_dir=os.environ.get("FLOODCAST_DATA_DIR", data.get("path")),
        scenario=scenario,
        train_years=tuple(split["train_years"]) if "train_years" in split else None,
        test_year=split.get("test_year"),
        lead_time=int(raw.get("lead_time", 6)),
        weights=weights,
        features=features,
        learners=learners,
        ensemble=ensemble,
        seed=int(os.environ.get("FLOODCAST_SEED", raw.get("seed", 0))),
        output_dir=os.environ.get("FLOODCAST_OUT_DIR", raw.get("output", "runs/out")),
        importance_repeats=int(raw.get("importance_repeats", 3)),
        render_figures=bool(raw.get("render_figures", True)),
    )
    return cfg


def _deep_merge(base, extra):
    out = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out
