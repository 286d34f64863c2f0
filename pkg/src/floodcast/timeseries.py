"""Hour-indexed series, flood terms, and the regression design matrix.

Timestamps are plain integer hour counters (hours since 1970-01-01 00:00
UTC-naive).  Calendar rendering happens only at I/O boundaries; month
arithmetic below is vectorized through numpy datetime64.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AlignmentError, RangeError, ValidationError

EPOCH = np.datetime64("1970-01-01T00", "h")
HOUR = np.timedelta64(1, "h")


def hours_to_datetime64(hours):
    """Integer hour counter(s) -> numpy datetime64[h]."""
    return EPOCH + np.asarray(hours, dtype=np.int64) * HOUR


def datetime64_to_hours(stamps):
    """datetime64 array -> integer hour counter(s)."""
    return ((np.asarray(stamps, dtype="datetime64[h]") - EPOCH) // HOUR).astype(np.int64)


def month_index(hours):
    """Hour counter(s) -> months elapsed since 1970-01 (integer)."""
    months = hours_to_datetime64(hours).astype("datetime64[M]")
    return (months - np.datetime64("1970-01", "M")).astype(np.int64)


def calendar_month(hours):
    """Hour counter(s) -> calendar month 1..12."""
    return (month_index(hours) % 12 + 1).astype(np.int64)


def month_label(index):
    """Month counter (months since 1970-01) -> 'YYYY-MM' string."""
    year, month = divmod(int(index), 12)
    return f"{1970 + year:04d}-{month + 1:02d}"


def parse_month_label(label):
    """'YYYY-MM' -> month counter, raising ValueError on junk."""
    year, month = label.strip().split("-")
    month = int(month)
    if not 1 <= month <= 12:
        raise ValueError(f"month out of range in {label!r}")
    return (int(year) - 1970) * 12 + month - 1


@dataclass(frozen=True)
class HydroSeries:
    """Contiguous hourly scalar series with an observed-value mask.

    Hourly spacing is guaranteed by construction: the series stores its
    first hour and implies timestamps start, start+1, ...  Missing data
    is expressed through ``mask`` (True = observed), never by gaps.
    """

    name: str
    start: int
    values: np.ndarray
    mask: np.ndarray = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValidationError(f"series {self.name!r}: values must be a non-empty 1-D array")
        mask = self.mask
        if mask is None:
            mask = np.ones(values.size, dtype=bool)
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != values.shape:
            raise ValidationError(f"series {self.name!r}: mask shape {mask.shape} != values shape {values.shape}")
        if not np.all(np.isfinite(values[mask])):
            raise ValidationError(f"series {self.name!r}: non-finite value where mask is observed")
        values = values.copy()
        values.setflags(write=False)
        mask = mask.copy()
        mask.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "start", int(self.start))

    @classmethod
    def from_timestamps(cls, name, timestamps, values, mask=None):
        """Build from an explicit hour-counter array, validating 1-h spacing."""
        stamps = np.asarray(timestamps, dtype=np.int64)
        if stamps.size == 0:
            raise ValidationError(f"series {name!r}: empty timestamp array")
        steps = np.diff(stamps)
        if stamps.size > 1 and not np.all(steps == 1):
            bad = int(np.flatnonzero(steps != 1)[0])
            raise ValidationError(
                f"series {name!r}: timestamps must increase by exactly 1 hour "
                f"(violated between positions {bad} and {bad + 1})"
            )
        return cls(name=name, start=int(stamps[0]), values=values, mask=mask)

    def __len__(self):
        return self.values.size

    @property
    def end(self):
        """Hour of the last sample (inclusive)."""
        return self.start + len(self) - 1

    @property
    def timestamps(self):
        return self.start + np.arange(len(self), dtype=np.int64)

    def covers(self, start, end):
        return self.start <= start and end <= self.end

    def window(self, start, end):
        """Values on [start, end] inclusive; RangeError if outside the series."""
        if not self.covers(start, end):
            raise RangeError(
                f"window [{start}, {end}] outside series {self.name!r} range [{self.start}, {self.end}]"
            )
        lo = start - self.start
        return self.values[lo : lo + (end - start + 1)]

    def window_mask(self, start, end):
        if not self.covers(start, end):
            raise RangeError(
                f"window [{start}, {end}] outside series {self.name!r} range [{self.start}, {self.end}]"
            )
        lo = start - self.start
        return self.mask[lo : lo + (end - start + 1)]


@dataclass(frozen=True)
class FloodTerm:
    """One contiguous hourly flood window."""

    term_id: int
    start: int
    end: int

    def __post_init__(self):
        if self.end < self.start:
            raise ValidationError(f"term {self.term_id}: end {self.end} before start {self.start}")

    @property
    def n_samples(self):
        return self.end - self.start + 1

    @property
    def hours(self):
        return self.start + np.arange(self.n_samples, dtype=np.int64)


@dataclass(frozen=True)
class FloodTermSet:
    """Ordered, pairwise-disjoint collection of flood terms."""

    terms: tuple

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ValidationError("a flood term set needs at least one term")
        for a, b in zip(terms, terms[1:]):
            if b.start <= a.end:
                raise ValidationError(
                    f"terms {a.term_id} and {b.term_id} overlap or are out of order"
                )
        object.__setattr__(self, "terms", terms)

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def __getitem__(self, i):
        return self.terms[i]

    @property
    def total_samples(self):
        return sum(t.n_samples for t in self.terms)

    @property
    def hours(self):
        """All in-term hours, term order preserved."""
        return np.concatenate([t.hours for t in self.terms])

    def term_of_hours(self):
        """Per-hour term id aligned with ``hours``."""
        return np.concatenate([np.full(t.n_samples, t.term_id, dtype=np.int64) for t in self.terms])


@dataclass(frozen=True)
class AlignedTable:
    """Co-indexed values of several series over their common hour range.

    ``valid`` is False on rows where any input mask was False; those rows
    are flagged rather than dropped so callers keep provenance.
    """

    start: int
    names: tuple
    columns: np.ndarray  # (n, len(names))
    valid: np.ndarray  # (n,)

    def __len__(self):
        return self.valid.size

    @property
    def timestamps(self):
        return self.start + np.arange(len(self), dtype=np.int64)

    def column(self, name):
        return self.columns[:, self.names.index(name)]


def align(series):
    """Co-index several hourly series on the intersection of their ranges.

    Raises AlignmentError when the intersection is empty, ValidationError
    on duplicate names.
    """
    series = list(series)
    if not series:
        raise AlignmentError("no series to align")
    names = tuple(s.name for s in series)
    if len(set(names)) != len(names):
        raise ValidationError(f"duplicate series names in align: {names}")
    lo = max(s.start for s in series)
    hi = min(s.end for s in series)
    if hi < lo:
        raise AlignmentError("aligned series share no common hour range")
    cols = np.column_stack([s.window(lo, hi) for s in series])
    valid = np.logical_and.reduce([s.window_mask(lo, hi) for s in series])
    return AlignedTable(start=lo, names=names, columns=cols, valid=valid)


def slice_terms(series, terms):
    """Per-term value vectors, term order preserved, lengths N_b.

    Raises RangeError when a term is not fully inside the series.
    """
    out = []
    for term in terms:
        if not series.covers(term.start, term.end):
            raise RangeError(
                f"term {term.term_id} [{term.start}, {term.end}] outside "
                f"series {series.name!r} range [{series.start}, {series.end}]"
            )
        out.append(series.window(term.start, term.end))
    return out


@dataclass(frozen=True)
class DesignMatrix:
    """Regression design: named predictor columns, target, sample weights.

    Columns flagged in ``dummy_columns`` (seasonal one-hots) are allowed to
    be constant; any other constant column is rejected as a data defect.
    """

    column_names: tuple
    X: np.ndarray
    y: np.ndarray
    w: np.ndarray
    term_of_row: np.ndarray
    timestamps: np.ndarray = None
    dummy_columns: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        names = tuple(self.column_names)
        if len(set(names)) != len(names):
            raise ValidationError("design matrix column names must be unique")
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        w = np.asarray(self.w, dtype=np.float64)
        term_of_row = np.asarray(self.term_of_row, dtype=np.int64)
        n = X.shape[0]
        if X.ndim != 2 or X.shape[1] != len(names):
            raise ValidationError(f"X shape {X.shape} does not match {len(names)} columns")
        if y.shape != (n,) or w.shape != (n,) or term_of_row.shape != (n,):
            raise ValidationError("y, w and term_of_row must all have one entry per row")
        if n == 0:
            raise ValidationError("design matrix has no rows")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y)) and np.all(np.isfinite(w))):
            raise ValidationError("design matrix entries must all be finite")
        if np.any(w < 0):
            raise ValidationError("sample weights must be nonnegative")
        if not np.any(w > 0):
            raise ValidationError("at least one sample weight must be positive")
        if n > 1:
            constant = np.all(X == X[0, :], axis=0)
            for j in np.flatnonzero(constant):
                if names[j] not in self.dummy_columns:
                    raise ValidationError(
                        f"column {names[j]!r} is constant across all rows and not flagged dummy"
                    )
        timestamps = self.timestamps
        if timestamps is not None:
            timestamps = np.asarray(timestamps, dtype=np.int64)
            if timestamps.shape != (n,):
                raise ValidationError("timestamps must have one entry per row")
        object.__setattr__(self, "column_names", names)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "term_of_row", term_of_row)
        object.__setattr__(self, "timestamps", timestamps)
        object.__setattr__(self, "dummy_columns", frozenset(self.dummy_columns))

    @property
    def n_rows(self):
        return self.X.shape[0]

    @property
    def n_columns(self):
        return self.X.shape[1]

    def rows_of_term(self, term_id):
        return np.flatnonzero(self.term_of_row == term_id)

    def term_ids(self):
        """Distinct term ids in row order of first appearance."""
        seen = {}
        for t in self.term_of_row:
            seen.setdefault(int(t), None)
        return list(seen)
