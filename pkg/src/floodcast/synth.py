"""Synthetic flood hydrology so the full pipeline runs with no external data.

Per year, a contiguous flood-season segment carries a multi-peak gamma-pulse
hydrograph, basin rainfall that leads the inflow by a configured lag, five
noisy rain gauges, a 400-cell rainfall grid, lead-time forecast guidance,
station weather series, and per-month ocean feature vectors built as two
Gaussian clusters (flood vs non-flood months) with a seasonal anomaly
gradient inside the flood cluster.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import BASE_SERIES, Dataset, GuidanceSeries, YearData
from .errors import ValidationError
from .features import GRID_CELLS, GridSeries
from .sstweights import MonthlyFeature
from .timeseries import (
    FloodTerm,
    FloodTermSet,
    HydroSeries,
    datetime64_to_hours,
    parse_month_label,
)

FLOOD_MONTHS = (6, 7, 8, 9, 10)
SEASON_HOURS = 3672  # June 1 .. October 31


@dataclass(frozen=True)
class ScenarioSpec:
    seed: int = 0
    years: int = 13
    start_year: int = 2007
    terms_per_year: int = 3
    test_terms: int = 5  # term count in the final (test) year
    term_length: int = 120
    warmup_hours: int = 48
    peak_range: tuple = (100.0, 2000.0)
    peak_counts: tuple = (1, 2, 3)
    noise_level: float = 0.05
    lag_hours: int = 6
    baseflow: float = 20.0
    sst_dim: int = 256
    sst_separation: float = 6.0
    sst_within_spread: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "peak_range", tuple(self.peak_range))
        object.__setattr__(self, "peak_counts", tuple(self.peak_counts))
        if self.years < 2:
            raise ValidationError("need at least two years (train + test)")
        if not (1 <= self.terms_per_year <= 5 and 1 <= self.test_terms <= 5):
            raise ValidationError("terms per year must be 1..5")
        if self.lag_hours < 0:
            raise ValidationError("rainfall lag must be nonnegative")
        if self.peak_range[0] <= 0 or self.peak_range[1] < self.peak_range[0]:
            raise ValidationError("peak range must be positive and ordered")
        if self.term_length < 48:
            raise ValidationError("terms shorter than 48 h leave no room for features")

    @property
    def test_year(self):
        return self.start_year + self.years - 1

    @property
    def train_years(self):
        return tuple(range(self.start_year, self.test_year))


def _rng(spec, *stream):
    return np.random.default_rng((spec.seed,) + stream)


def _season_start_hour(year):
    return int(datetime64_to_hours(np.datetime64(f"{year}-06-01T00", "h")))


def _terms_for_year(spec, year, year_index, term_id_start):
    """Evenly spread terms over the June..October season, with jitter."""
    n_terms = spec.test_terms if year == spec.test_year else spec.terms_per_year
    season_start = _season_start_hour(year)
    stride = SEASON_HOURS // n_terms
    rng = _rng(spec, 1, year_index)
    terms = []
    for i in range(n_terms):
        jitter = int(rng.integers(0, max(1, stride - spec.term_length - 24)))
        start = season_start + i * stride + jitter
        terms.append(FloodTerm(term_id_start + i, start, start + spec.term_length - 1))
    return terms


def _gamma_pulse(length, t_peak, amplitude, shape, scale):
    """Unit-hydrograph shaped pulse, normalized so its maximum is amplitude."""
    t = np.arange(length, dtype=np.float64)
    mode = (shape - 1.0) * scale
    x = np.maximum(t - (t_peak - mode), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        pulse = x ** (shape - 1.0) * np.exp(-x / scale)
    pulse[~np.isfinite(pulse)] = 0.0
    peak = pulse.max()
    return pulse / peak * amplitude if peak > 0 else pulse


def gen_hydrograph(spec):
    """Per-year inflow segments plus the global flood-term calendar.

    Each term holds at least one gamma-shaped peak; the largest peak of a
    term reaches that term's sampled level from peak_range.  Deterministic
    given spec.seed.
    """
    inflows, all_terms = [], []
    term_id = 1
    for yi in range(spec.years):
        year = spec.start_year + yi
        terms = _terms_for_year(spec, year, yi, term_id)
        term_id += len(terms)
        all_terms.extend(terms)

        seg_start = terms[0].start - spec.warmup_hours
        seg_end = terms[-1].end
        n = seg_end - seg_start + 1
        rng = _rng(spec, 2, yi)
        flow = np.full(n, spec.baseflow)
        for term in terms:
            lo, hi = spec.peak_range
            level = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
            n_peaks = int(rng.choice(spec.peak_counts))
            # the first peak carries the term level, the rest are smaller
            amplitudes = [level - spec.baseflow]
            amplitudes += list((level - spec.baseflow) * rng.uniform(0.2, 0.7, n_peaks - 1))
            peak_times = np.sort(rng.uniform(0.25, 0.85, n_peaks)) * term.n_samples
            pulses = np.zeros(term.n_samples)
            for amp, tp in zip(amplitudes, peak_times):
                shape = float(rng.uniform(2.0, 4.0))
                scale = float(rng.uniform(3.0, 8.0))
                pulses += _gamma_pulse(term.n_samples, tp, amp, shape, scale)
            # overlapping pulses may overshoot: rescale so the term max
            # lands exactly on the sampled level
            pulses *= (level - spec.baseflow) / pulses.max()
            offset = term.start - seg_start
            flow[offset : offset + term.n_samples] += pulses
        if spec.noise_level > 0:
            flow *= np.exp(rng.normal(0.0, spec.noise_level, n))
        inflows.append(HydroSeries("inflow", seg_start, flow))
    return inflows, FloodTermSet(tuple(all_terms))


def gen_rainfall(inflow, spec, year_index=0):
    """Basin rainfall and its products for one year segment.

    Rainfall leads the inflow by spec.lag_hours; guidance for lead h is the
    realized rainfall h hours ahead plus noise growing with h; the grid
    spreads the basin value over a fixed spatial pattern with unit mean.
    Returns (basin, gauges, grid, guidance).
    """
    rng = _rng(spec, 3, year_index)
    n = len(inflow)
    flow = inflow.values
    # rain at t mirrors the flow response lag_hours later
    future = np.concatenate([flow[spec.lag_hours :], np.full(spec.lag_hours, flow[-1])])
    basin = 0.05 * np.maximum(future - spec.baseflow, 0.0)
    if spec.noise_level > 0:
        basin = basin * np.exp(rng.normal(0.0, spec.noise_level, n))

    gauge_factor = _rng(spec, 4).uniform(0.7, 1.3, 5)  # station identity, year-stable
    gauges = []
    for r in range(5):
        g = basin * gauge_factor[r]
        if spec.noise_level > 0:
            g = g * np.exp(rng.normal(0.0, spec.noise_level, n))
        gauges.append(HydroSeries(f"gauge_{r + 1}", inflow.start, g))

    pattern = _rng(spec, 5).dirichlet(np.full(GRID_CELLS, 8.0)) * GRID_CELLS  # mean 1
    cells = basin[:, None] * pattern[None, :]
    cells += rng.gamma(0.05, 0.05, size=cells.shape)  # trace wetness, keeps spread > 0
    grid = GridSeries(start=inflow.start, cells=cells)

    leads = []
    for h in range(1, 7):
        ahead = np.concatenate([basin[h:], np.full(h, basin[-1])])
        if spec.noise_level > 0:
            ahead = np.maximum(ahead + rng.normal(0.0, spec.noise_level * h, n) * ahead.std(), 0.0)
        leads.append(ahead)
    guidance = GuidanceSeries(start=inflow.start, values=np.column_stack(leads))

    basin_series = HydroSeries("basin_rain", inflow.start, basin)
    return basin_series, gauges, grid, guidance


def _station_series(spec, inflow, basin, year_index):
    """Water height, vapor pressure, coast temperature and wind speed."""
    rng = _rng(spec, 6, year_index)
    n = len(inflow)
    out = {}
    height = 1.5 * np.maximum(inflow.values, 0.0) ** 0.6
    if spec.noise_level > 0:
        height = height * np.exp(rng.normal(0.0, spec.noise_level / 2, n))
    out["water_height"] = HydroSeries("water_height", inflow.start, height)

    hours = np.arange(n)
    diurnal = np.sin(2 * np.pi * hours / 24.0)
    for m in range(1, 3):
        vp = 18.0 + 2.5 * diurnal + 0.04 * basin.values + rng.normal(0, 0.4, n)
        vp = np.cumsum(rng.normal(0, 0.02, n)) + vp
        out[f"vp_{m}"] = HydroSeries(f"vp_{m}", inflow.start, vp)
    for k in range(1, 4):
        temp = 24.0 + 3.0 * diurnal + rng.normal(0, 0.5, n) + np.cumsum(rng.normal(0, 0.01, n))
        out[f"coast_temp_{k}"] = HydroSeries(f"coast_temp_{k}", inflow.start, temp)
        wind = np.abs(4.0 + 1.2 * diurnal + rng.normal(0, 0.8, n))
        out[f"wind_{k}"] = HydroSeries(f"wind_{k}", inflow.start, wind)
    return out


def gen_sst_features(months, flood_months=FLOOD_MONTHS, seed=0, k=256,
                     separation=6.0, within_spread=2.0, start_month="2007-01"):
    """Monthly ocean feature vectors: two Gaussian clusters plus a seasonal
    anomaly direction inside the flood cluster.

    separation 0 makes flood and non-flood months indistinguishable (the
    negative control).  Separation is expressed in dimension-normalized
    units (internally scaled by k^(1/4)) so a given setting yields the
    same cluster detectability at any feature width.
    """
    if months < 12:
        raise ValidationError("need at least a year of months")
    rng = np.random.default_rng((seed, 7))
    base = parse_month_label(start_month)
    dim_scale = float(k) ** 0.25
    flood_dir = np.zeros(k)
    flood_dir[0] = 1.0
    anomaly_dir = np.zeros(k)
    anomaly_dir[min(1, k - 1)] = 1.0
    features = []
    for i in range(months):
        month_counter = base + i
        calendar = month_counter % 12 + 1
        center = separation * dim_scale * flood_dir if calendar in flood_months else np.zeros(k)
        if calendar in flood_months:
            # season position in [-1, 1]: June -> -1, October -> +1
            pos = (flood_months.index(calendar) / (len(flood_months) - 1)) * 2.0 - 1.0
            center = center + within_spread * dim_scale * pos * anomaly_dir
        vec = center + rng.normal(0.0, 1.0, k)
        features.append(MonthlyFeature(month=month_counter, vector=vec))
    return features


def gen_dataset(spec):
    """Full synthetic dataset: all year segments, terms, monthly features."""
    inflows, terms = gen_hydrograph(spec)
    years = []
    for yi, inflow in enumerate(inflows):
        year = spec.start_year + yi
        basin, gauges, grid, guidance = gen_rainfall(inflow, spec, year_index=yi)
        series = {"inflow": inflow}
        for g in gauges:
            series[g.name] = g
        series.update(_station_series(spec, inflow, basin, yi))
        missing = set(BASE_SERIES) - set(series)
        if missing:
            raise ValidationError(f"generator missed series {missing}")
        years.append(YearData(year=year, series=series, grid=grid, guidance=guidance))

    n_months = spec.years * 12
    monthly = gen_sst_features(
        n_months,
        seed=spec.seed,
        k=spec.sst_dim,
        separation=spec.sst_separation,
        within_spread=spec.sst_within_spread,
        start_month=f"{spec.start_year}-01",
    )
    meta = {
        "seed": spec.seed,
        "start_year": spec.start_year,
        "years": spec.years,
        "test_year": spec.test_year,
        "lag_hours": spec.lag_hours,
    }
    return Dataset(years=tuple(years), terms=terms, monthly_features=tuple(monthly), meta=meta)
