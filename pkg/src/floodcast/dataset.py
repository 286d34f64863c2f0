"""Dataset container shared by the generator, the CSV layer and the pipeline.

A dataset is a list of per-year contiguous segments (flood-season windows)
plus the global flood-term calendar and the monthly ocean feature vectors.
Series within one segment share its hour range; terms always lie fully
inside one segment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .features import GridSeries
from .timeseries import FloodTermSet, HydroSeries

BASE_SERIES = (
    "inflow",
    "water_height",
    "gauge_1",
    "gauge_2",
    "gauge_3",
    "gauge_4",
    "gauge_5",
    "vp_1",
    "vp_2",
    "coast_temp_1",
    "coast_temp_2",
    "coast_temp_3",
    "wind_1",
    "wind_2",
    "wind_3",
)

N_GUIDANCE_LEADS = 6


@dataclass(frozen=True)
class GuidanceSeries:
    """Rainfall forecast guidance, one column per lead hour h = 1..6."""

    start: int
    values: np.ndarray  # (n, N_GUIDANCE_LEADS)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != N_GUIDANCE_LEADS:
            raise ValidationError(f"guidance needs {N_GUIDANCE_LEADS} lead columns")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "start", int(self.start))

    def __len__(self):
        return self.values.shape[0]

    @property
    def end(self):
        return self.start + len(self) - 1


@dataclass(frozen=True)
class YearData:
    """One contiguous flood-season segment of raw observations."""

    year: int
    series: dict  # name -> HydroSeries, all sharing the segment range
    grid: GridSeries
    guidance: GuidanceSeries

    def __post_init__(self):
        ranges = {(s.start, s.end) for s in self.series.values()}
        ranges.add((self.grid.start, self.grid.end))
        ranges.add((self.guidance.start, self.guidance.end))
        if len(ranges) != 1:
            raise ValidationError(f"year {self.year}: segment series have mismatched ranges")

    @property
    def start(self):
        return self.grid.start

    @property
    def end(self):
        return self.grid.end


@dataclass(frozen=True)
class Dataset:
    years: tuple  # YearData, ascending
    terms: FloodTermSet
    monthly_features: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        years = tuple(self.years)
        for term in self.terms:
            if self.year_of_term(term, years) is None:
                raise ValidationError(f"term {term.term_id} lies in no segment")
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "monthly_features", tuple(self.monthly_features))

    @staticmethod
    def year_of_term(term, years):
        for yd in years:
            if yd.start <= term.start and term.end <= yd.end:
                return yd
        return None

    def segment_of(self, term):
        yd = self.year_of_term(term, self.years)
        if yd is None:
            raise ValidationError(f"term {term.term_id} lies in no segment")
        return yd

    def terms_of_year(self, year):
        yd = next(y for y in self.years if y.year == year)
        return [t for t in self.terms if yd.start <= t.start and t.end <= yd.end]

    def split(self, train_years, test_year):
        """(train_terms, test_terms) by calendar year; must be disjoint."""
        if test_year in train_years:
            raise ValidationError("train and test years overlap")
        train, test = [], []
        for term in self.terms:
            y = self.segment_of(term).year
            if y == test_year:
                test.append(term)
            elif y in train_years:
                train.append(term)
        if not train or not test:
            raise ValidationError("empty train or test term set after the year split")
        return FloodTermSet(tuple(train)), FloodTermSet(tuple(test))
