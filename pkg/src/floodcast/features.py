"""Predictor construction: lag blocks, moving averages, grid-moment
statistics, trapezoid gradients, trailing-accumulation PCA, guidance PCA
and seasonal dummies.

Every transform is causal: the value at row t depends only on raw values
at hours <= t.  Rows without enough history (or with masked inputs in
their window) are flagged invalid instead of being imputed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientHistory, ValidationError
from .sstweights import PcaModel, components_for_threshold, fit_pca
from .timeseries import HydroSeries, calendar_month

GRID_CELLS = 400
SEASON_MONTHS = (6, 7, 8, 9, 10)


@dataclass(frozen=True)
class LagSpec:
    """Order of the lag / moving-average transforms (hours)."""

    p: int = 8

    def __post_init__(self):
        if self.p < 1:
            raise ValidationError(f"lag order must be >= 1, got {self.p}")


@dataclass(frozen=True)
class GridField:
    """One hour of analyzed rainfall on the fixed 400-cell basin grid."""

    t: int
    cells: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.float64)
        if cells.shape != (GRID_CELLS,):
            raise ValidationError(f"grid field needs exactly {GRID_CELLS} cells, got {cells.shape}")
        if not np.all(np.isfinite(cells)):
            raise ValidationError(f"grid field at hour {self.t}: non-finite cells")
        if np.any(cells < 0):
            raise ValidationError(f"grid field at hour {self.t}: negative rainfall")
        cells = cells.copy()
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)


@dataclass(frozen=True)
class GridSeries:
    """Contiguous hourly stack of grid fields (n, 400)."""

    start: int
    cells: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.float64)
        if cells.ndim != 2 or cells.shape[1] != GRID_CELLS:
            raise ValidationError(f"grid series must be (n, {GRID_CELLS}), got {cells.shape}")
        if np.any(cells < 0) or not np.all(np.isfinite(cells)):
            raise ValidationError("grid series cells must be finite and nonnegative")
        cells = cells.copy()
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "start", int(self.start))

    def __len__(self):
        return self.cells.shape[0]

    @property
    def end(self):
        return self.start + len(self) - 1

    def field(self, hour):
        return GridField(t=hour, cells=self.cells[hour - self.start])


@dataclass(frozen=True)
class FeatureBlock:
    """Named feature columns aligned to a parent series, with row validity."""

    names: tuple
    values: np.ndarray  # (n, k)
    valid: np.ndarray  # (n,)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        valid = np.asarray(self.valid, dtype=bool)
        names = tuple(self.names)
        if values.ndim != 2 or values.shape[1] != len(names):
            raise ValidationError("feature block values must be (n, len(names))")
        if valid.shape != (values.shape[0],):
            raise ValidationError("feature block valid flag must have one entry per row")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "valid", valid)

    def __len__(self):
        return self.values.shape[0]


def stack_blocks(blocks):
    """Concatenate blocks column-wise; a row is valid when all are."""
    blocks = list(blocks)
    n = len(blocks[0])
    for b in blocks:
        if len(b) != n:
            raise ValidationError("feature blocks must share the row axis")
    names = tuple(name for b in blocks for name in b.names)
    if len(set(names)) != len(names):
        raise ValidationError("duplicate feature names when stacking blocks")
    values = np.hstack([b.values for b in blocks])
    valid = np.logical_and.reduce([b.valid for b in blocks])
    return FeatureBlock(names=names, values=values, valid=valid)


def _values_mask(series):
    if isinstance(series, HydroSeries):
        return series.values, series.mask
    values = np.asarray(series, dtype=np.float64)
    return values, np.ones(values.size, dtype=bool)


def _window_all_observed(mask, window):
    """True at t when mask[t-window+1 .. t] are all observed."""
    run = np.convolve(mask.astype(np.int64), np.ones(window, dtype=np.int64), mode="full")
    return run[: mask.size] == window


def ar_block(series, spec=LagSpec(), name="y"):
    """Lagged copies: column j holds the value at t-j, j = 1..p."""
    values, mask = _values_mask(series)
    n, p = values.size, spec.p
    if n <= p:
        raise InsufficientHistory(f"{name}: need more than {p} samples, got {n}")
    cols = np.full((n, p), np.nan)
    valid = np.zeros(n, dtype=bool)
    valid[p:] = True
    for j in range(1, p + 1):
        cols[j:, j - 1] = values[:-j]
        valid[j:] &= mask[:-j]
    valid &= mask
    names = tuple(f"{name}_lag{j}" for j in range(1, p + 1))
    return FeatureBlock(names=names, values=cols, valid=valid)


def ma_block(series, spec=LagSpec(), name="y"):
    """Trailing mean of the p strictly-past values (current hour excluded)."""
    values, mask = _values_mask(series)
    n, p = values.size, spec.p
    if n <= p:
        raise InsufficientHistory(f"{name}: need more than {p} samples, got {n}")
    kernel = np.concatenate([[0.0], np.full(p, 1.0 / p)])  # lags 1..p
    conv = np.convolve(np.where(mask, values, 0.0), kernel, mode="full")
    out = np.full(n, np.nan)
    out[p:] = conv[p:n]
    valid = np.zeros(n, dtype=bool)
    valid[p:] = _window_all_observed(mask, p)[p - 1 : n - 1]
    valid &= mask
    out[~valid] = np.nan
    return FeatureBlock(names=(f"{name}_ma{p}",), values=out[:, None], valid=valid)


@dataclass(frozen=True)
class GridMoments:
    mean: float
    std: float
    skewness: float
    kurtosis: float


def grid_moments(cells):
    """Population moments over one field's 400 cells.

    Kurtosis is non-excess (a normal sample gives ~3).  Zero spread makes
    skewness and kurtosis undefined: they come back NaN with a warning.
    """
    cells = np.asarray(cells, dtype=np.float64)
    if cells.shape != (GRID_CELLS,):
        raise ValidationError(f"grid moments need exactly {GRID_CELLS} cells")
    mean = cells.mean()
    d = cells - mean
    var = np.mean(d**2)
    std = np.sqrt(var)
    if var == 0:
        warnings.warn("zero-variance grid field: skewness/kurtosis undefined", stacklevel=2)
        return GridMoments(mean=float(mean), std=0.0, skewness=np.nan, kurtosis=np.nan)
    skew = np.mean(d**3) / std**3
    kurt = np.mean(d**4) / var**2
    return GridMoments(mean=float(mean), std=float(std), skewness=float(skew), kurtosis=float(kurt))


def grid_moments_block(grid, name="grid"):
    """Per-hour moment features over a grid series (4 columns)."""
    cells = grid.cells
    mean = cells.mean(axis=1)
    d = cells - mean[:, None]
    var = np.mean(d**2, axis=1)
    std = np.sqrt(var)
    degenerate = var == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        skew = np.where(degenerate, np.nan, np.mean(d**3, axis=1) / std**3)
        kurt = np.where(degenerate, np.nan, np.mean(d**4, axis=1) / var**2)
    if np.any(degenerate):
        warnings.warn(
            f"{int(degenerate.sum())} zero-variance grid hours: skew/kurtosis flagged NaN",
            stacklevel=2,
        )
    values = np.column_stack([mean, std, skew, kurt])
    names = tuple(f"{name}_{m}" for m in ("mean", "std", "skew", "kurt"))
    return FeatureBlock(names=names, values=values, valid=~degenerate)


def trapezoid_gradient(series, window=12, mode="least_squares", name="y"):
    """Slope per hour over the trailing window.

    ``least_squares`` fits a line to the window+1 most recent values;
    ``difference`` uses the plain quotient (y_t - y_{t-window}) / window.
    """
    values, mask = _values_mask(series)
    n = values.size
    if n <= window:
        raise InsufficientHistory(f"{name}: need more than {window} samples, got {n}")
    out = np.full(n, np.nan)
    if mode == "least_squares":
        # slope_t = sum_j (window/2 - j) * y_{t-j} / denom, j = 0..window
        j = np.arange(window + 1, dtype=np.float64)
        kernel = (window / 2.0 - j)
        denom = np.sum((j - window / 2.0) ** 2)
        conv = np.convolve(np.where(mask, values, 0.0), kernel / denom, mode="full")
        out[window:] = conv[window:n]
    elif mode == "difference":
        out[window:] = (values[window:] - values[:-window]) / window
    else:
        raise ValidationError(f"unknown trapezoid gradient mode {mode!r}")
    valid = np.zeros(n, dtype=bool)
    valid[window:] = _window_all_observed(mask, window + 1)[window:]
    out[~valid] = np.nan
    return FeatureBlock(names=(f"{name}_grad{window}",), values=out[:, None], valid=valid)


def accumulate_grid(grid, horizon=6):
    """Trailing per-cell rainfall sums over the past ``horizon`` hours
    (current hour included).  Returns (sums (n, 400), valid (n,))."""
    cells = grid.cells
    n = cells.shape[0]
    if n < horizon:
        raise InsufficientHistory(f"grid accumulation needs >= {horizon} hours, got {n}")
    windows = np.lib.stride_tricks.sliding_window_view(cells, horizon, axis=0)
    sums = np.full_like(cells, np.nan)
    sums[horizon - 1 :] = windows.sum(axis=-1)
    valid = np.zeros(n, dtype=bool)
    valid[horizon - 1 :] = True
    return sums, valid


class PcaReducer:
    """Threshold-selected PCA projection, fitted once and then frozen.

    Components are kept until the cumulative explained variance reaches
    the threshold (rank-deficient inputs keep every component with
    nonzero variance); an optional hard cap bounds the count.
    """

    def __init__(self, var_threshold=0.85, max_components=None):
        self.var_threshold = var_threshold
        self.max_components = max_components
        self.model: PcaModel | None = None
        self.n_components = None

    def fit(self, X):
        X = np.asarray(X, dtype=np.float64)
        model = fit_pca(X)
        nonzero = int(np.sum(model.explained_ratio > 1e-12))
        if nonzero == 0:
            raise ValidationError("PCA reducer: input has zero total variance")
        c = components_for_threshold(model.explained_ratio, self.var_threshold)
        c = min(c, nonzero)
        if self.max_components is not None:
            c = min(c, self.max_components)
        self.model = model
        self.n_components = c
        return self

    @property
    def explained_ratio(self):
        return self.model.explained_ratio

    def transform(self, X):
        if self.model is None:
            raise ValidationError("PCA reducer used before fit")
        return self.model.transform(X)[:, : self.n_components]

    def reconstruct(self, X):
        """Back-projection from the kept components (for audit tests)."""
        scores = self.transform(X)
        comps = self.model.components[: self.n_components]
        return scores @ comps + self.model.mean


def accum_rain_pca(grid, horizon=6, var_threshold=0.85, fit_rows=None,
                   max_components=16, name="accum_rain"):
    """PCA-compressed trailing rainfall accumulation.

    The projection is fitted on ``fit_rows`` only (training rows) and then
    applied everywhere, so test rows never influence the loadings.
    Returns (FeatureBlock, fitted PcaReducer).
    """
    sums, valid = accumulate_grid(grid, horizon=horizon)
    fit_mask = valid if fit_rows is None else (valid & np.asarray(fit_rows, dtype=bool))
    if not np.any(fit_mask):
        raise InsufficientHistory("no valid rows to fit the accumulation PCA")
    reducer = PcaReducer(var_threshold=var_threshold, max_components=max_components)
    reducer.fit(sums[fit_mask])
    scores = np.full((sums.shape[0], reducer.n_components), np.nan)
    scores[valid] = reducer.transform(sums[valid])
    names = tuple(f"{name}_pc{i + 1}" for i in range(reducer.n_components))
    return FeatureBlock(names=names, values=scores, valid=valid), reducer


def guidance_pca(guidance, var_threshold=0.90, fit_rows=None, name="guidance"):
    """PCA compression of the lead-time guidance columns (h = 1..6)."""
    guidance = np.asarray(guidance, dtype=np.float64)
    if guidance.ndim != 2:
        raise ValidationError("guidance must be a 2-D (n, leads) matrix")
    valid = np.all(np.isfinite(guidance), axis=1)
    fit_mask = valid if fit_rows is None else (valid & np.asarray(fit_rows, dtype=bool))
    if not np.any(fit_mask):
        raise InsufficientHistory("no valid rows to fit the guidance PCA")
    reducer = PcaReducer(var_threshold=var_threshold)
    reducer.fit(guidance[fit_mask])
    scores = np.full((guidance.shape[0], reducer.n_components), np.nan)
    scores[valid] = reducer.transform(guidance[valid])
    names = tuple(f"{name}_pc{i + 1}" for i in range(reducer.n_components))
    return FeatureBlock(names=names, values=scores, valid=valid), reducer


def seasonal_dummies(timestamps, name="month"):
    """One-hot month indicators for the June..October flood season."""
    months = calendar_month(timestamps)
    bad = ~np.isin(months, SEASON_MONTHS)
    if np.any(bad):
        raise ValidationError(
            f"timestamp with calendar month {int(months[bad][0])} outside the "
            f"June-October flood season"
        )
    values = np.column_stack([(months == m).astype(np.float64) for m in SEASON_MONTHS])
    names = tuple(f"{name}_{m}" for m in SEASON_MONTHS)
    return FeatureBlock(names=names, values=values, valid=np.ones(months.size, dtype=bool))
