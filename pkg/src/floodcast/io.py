"""CSV ingest/emit and the on-disk dataset directory.

All writers format floats with repr (shortest round-trip), so re-running
with identical inputs reproduces artifacts byte for byte.  Readers
report structural problems (gaps, bad headers) as FormatError and bad
cells as ParseError, both carrying 1-based line numbers.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .dataset import BASE_SERIES, Dataset, GuidanceSeries, YearData
from .errors import FormatError, ParseError, ValidationError
from .features import GRID_CELLS, GridSeries
from .sstweights import MonthlyFeature, WeightSeries
from .timeseries import (
    FloodTerm,
    FloodTermSet,
    HydroSeries,
    datetime64_to_hours,
    hours_to_datetime64,
    month_label,
    parse_month_label,
)


def fnum(x):
    """Shortest round-trip decimal form of a float."""
    return repr(float(x))


def hour_to_text(hour):
    """Hour counter -> 'YYYY-MM-DD HH:00'."""
    stamp = hours_to_datetime64(int(hour))
    date, time = np.datetime_as_string(stamp, unit="h").split("T")
    return f"{date} {time}:00"


def text_to_hour(text, line=None):
    text = text.strip()
    try:
        date, time = text.split(" ")
        hh, mm = time.split(":")
        if mm != "00":
            raise ValueError("sub-hourly timestamp")
        stamp = np.datetime64(f"{date}T{hh}", "h")
    except ValueError as exc:
        raise ParseError(f"bad timestamp {text!r} ({exc})", line=line) from None
    return int(datetime64_to_hours(stamp))


def _parse_float(cell, line, allow_empty=False):
    cell = cell.strip()
    if cell == "":
        if allow_empty:
            return None
        raise ParseError("empty numeric cell", line=line)
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"non-numeric cell {cell!r}", line=line) from None


def _read_rows(path, expected_header):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path.name}: empty file", line=1) from None
        if header != expected_header:
            raise FormatError(
                f"{path.name}: header {header[:4]}... does not match expected "
                f"{expected_header[:4]}...",
                line=1,
            )
        rows = [(i + 2, row) for i, row in enumerate(reader) if row]
    if not rows:
        raise FormatError(f"{path.name}: no data rows", line=2)
    return rows


def _check_hourly(hours, lines):
    for k in range(1, len(hours)):
        if hours[k] != hours[k - 1] + 1:
            raise FormatError(
                f"gap in hourly timestamps: {hour_to_text(hours[k - 1])} is "
                f"followed by {hour_to_text(hours[k])}",
                line=lines[k],
            )


# ----------------------------------------------------------------------
# scalar series
# ----------------------------------------------------------------------

SERIES_HEADER = ["timestamp", "value"]


def write_series_csv(path, series):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(SERIES_HEADER) + "\n")
        for i, hour in enumerate(series.timestamps):
            cell = fnum(series.values[i]) if series.mask[i] else ""
            fh.write(f"{hour_to_text(hour)},{cell}\n")


def read_series_csv(path, name=None):
    rows = _read_rows(path, SERIES_HEADER)
    hours, values, mask, lines = [], [], [], []
    for line, row in rows:
        if len(row) != 2:
            raise FormatError(f"expected 2 columns, got {len(row)}", line=line)
        hours.append(text_to_hour(row[0], line=line))
        v = _parse_float(row[1], line, allow_empty=True)
        values.append(np.nan if v is None else v)
        mask.append(v is not None)
        lines.append(line)
    _check_hourly(hours, lines)
    name = name or Path(path).stem
    return HydroSeries(name=name, start=hours[0], values=np.asarray(values),
                       mask=np.asarray(mask, dtype=bool))


# ----------------------------------------------------------------------
# grid fields and guidance
# ----------------------------------------------------------------------

GRID_HEADER = ["timestamp"] + [f"c{i:03d}" for i in range(GRID_CELLS)]
GUIDANCE_HEADER = ["timestamp"] + [f"h{h}" for h in range(1, 7)]


def write_grid_csv(path, grid):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(GRID_HEADER) + "\n")
        for i in range(len(grid)):
            cells = ",".join(fnum(v) for v in grid.cells[i])
            fh.write(f"{hour_to_text(grid.start + i)},{cells}\n")


def read_grid_csv(path):
    rows = _read_rows(path, GRID_HEADER)
    hours, lines, cells = [], [], []
    for line, row in rows:
        if len(row) != GRID_CELLS + 1:
            raise FormatError(f"expected {GRID_CELLS + 1} columns, got {len(row)}", line=line)
        hours.append(text_to_hour(row[0], line=line))
        cells.append([_parse_float(c, line) for c in row[1:]])
        lines.append(line)
    _check_hourly(hours, lines)
    return GridSeries(start=hours[0], cells=np.asarray(cells))


def write_guidance_csv(path, guidance):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(GUIDANCE_HEADER) + "\n")
        for i in range(len(guidance)):
            vals = ",".join(fnum(v) for v in guidance.values[i])
            fh.write(f"{hour_to_text(guidance.start + i)},{vals}\n")


def read_guidance_csv(path):
    rows = _read_rows(path, GUIDANCE_HEADER)
    hours, lines, values = [], [], []
    for line, row in rows:
        if len(row) != 7:
            raise FormatError(f"expected 7 columns, got {len(row)}", line=line)
        hours.append(text_to_hour(row[0], line=line))
        values.append([_parse_float(c, line) for c in row[1:]])
        lines.append(line)
    _check_hourly(hours, lines)
    return GuidanceSeries(start=hours[0], values=np.asarray(values))


# ----------------------------------------------------------------------
# monthly feature vectors and weights
# ----------------------------------------------------------------------

def write_monthly_features_csv(path, features):
    features = list(features)
    k = features[0].vector.size
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write("month," + ",".join(f"z{i}" for i in range(k)) + "\n")
        for f in features:
            fh.write(f.label + "," + ",".join(fnum(v) for v in f.vector) + "\n")


def read_monthly_features_csv(path):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path.name}: empty file", line=1) from None
        if len(header) < 2 or header[0] != "month":
            raise FormatError(f"{path.name}: first column must be 'month'", line=1)
        k = len(header) - 1
        if header[1:] != [f"z{i}" for i in range(k)]:
            raise FormatError(f"{path.name}: feature columns must be z0..z{k - 1}", line=1)
        features = []
        for i, row in enumerate(reader):
            if not row:
                continue
            line = i + 2
            if len(row) != k + 1:
                raise FormatError(f"expected {k + 1} columns, got {len(row)}", line=line)
            try:
                month = parse_month_label(row[0])
            except ValueError as exc:
                raise ParseError(str(exc), line=line) from None
            vec = np.asarray([_parse_float(c, line) for c in row[1:]])
            features.append(MonthlyFeature(month=month, vector=vec))
    if not features:
        raise FormatError(f"{path.name}: no data rows", line=2)
    return features


def write_weights_csv(path, weights):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write("month,stw\n")
        for month, value in zip(weights.months, weights.monthly):
            fh.write(f"{month_label(month)},{fnum(value)}\n")


def read_weights_csv(path, epsilon=1e-8):
    rows = _read_rows(path, ["month", "stw"])
    months, values = [], []
    for line, row in rows:
        try:
            months.append(parse_month_label(row[0]))
        except ValueError as exc:
            raise ParseError(str(exc), line=line) from None
        values.append(_parse_float(row[1], line))
    return WeightSeries(months=tuple(months), monthly=np.asarray(values), epsilon=epsilon)


def ingest_csv(path, schema):
    """Schema-dispatched ingestion of the supported CSV kinds."""
    readers = {
        "series": read_series_csv,
        "grid": read_grid_csv,
        "guidance": read_guidance_csv,
        "monthly_features": read_monthly_features_csv,
        "weights": read_weights_csv,
    }
    if schema not in readers:
        raise ValidationError(f"unknown ingest schema {schema!r}")
    return readers[schema](path)


# ----------------------------------------------------------------------
# dataset directory
# ----------------------------------------------------------------------

def write_dataset(dataset, out_dir):
    """Persist a dataset as one directory of CSVs plus a manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "terms": [
            {"id": t.term_id, "start": hour_to_text(t.start), "end": hour_to_text(t.end)}
            for t in dataset.terms
        ],
        "years": [yd.year for yd in dataset.years],
        "meta": dataset.meta,
    }
    (out / "dataset.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    for yd in dataset.years:
        ydir = out / f"year_{yd.year}"
        for name in BASE_SERIES:
            write_series_csv(ydir / f"{name}.csv", yd.series[name])
        write_grid_csv(ydir / "grid.csv", yd.grid)
        write_guidance_csv(ydir / "guidance.csv", yd.guidance)
    if dataset.monthly_features:
        write_monthly_features_csv(out / "sst_features.csv", dataset.monthly_features)


def read_dataset(in_dir):
    src = Path(in_dir)
    manifest_path = src / "dataset.json"
    if not manifest_path.exists():
        raise FormatError(f"{src}: missing dataset.json manifest")
    manifest = json.loads(manifest_path.read_text())
    terms = FloodTermSet(
        tuple(
            FloodTerm(int(t["id"]), text_to_hour(t["start"]), text_to_hour(t["end"]))
            for t in manifest["terms"]
        )
    )
    years = []
    for year in manifest["years"]:
        ydir = src / f"year_{year}"
        series = {name: read_series_csv(ydir / f"{name}.csv", name=name) for name in BASE_SERIES}
        years.append(
            YearData(
                year=int(year),
                series=series,
                grid=read_grid_csv(ydir / "grid.csv"),
                guidance=read_guidance_csv(ydir / "guidance.csv"),
            )
        )
    features = []
    feat_path = src / "sst_features.csv"
    if feat_path.exists():
        features = read_monthly_features_csv(feat_path)
    return Dataset(years=tuple(years), terms=terms, monthly_features=tuple(features),
                   meta=manifest.get("meta", {}))


# ----------------------------------------------------------------------
# report emission
# ----------------------------------------------------------------------

def emit_plotdata(out_dir, term_id, timestamps, actual, per_model, ensemble_vec):
    """One per-term CSV: t, actual, the base models, the ensemble."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    models = list(per_model)
    path = out / f"term_{int(term_id):03d}.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(["t", "actual"] + models + ["ensemble"]) + "\n")
        for i, hour in enumerate(timestamps):
            cells = [hour_to_text(hour), fnum(actual[i])]
            cells += [fnum(per_model[m][i]) for m in models]
            cells.append(fnum(ensemble_vec[i]))
            fh.write(",".join(cells) + "\n")
    return path


def write_forecast_csv(path, term_of_row, timestamps, values):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write("term_id,timestamp,value\n")
        for t, hour, v in zip(term_of_row, timestamps, values):
            fh.write(f"{int(t)},{hour_to_text(hour)},{fnum(v)}\n")


def read_forecast_csv(path):
    rows = _read_rows(path, ["term_id", "timestamp", "value"])
    term_of_row, hours, values = [], [], []
    for line, row in rows:
        term_of_row.append(int(_parse_float(row[0], line)))
        hours.append(text_to_hour(row[1], line=line))
        values.append(_parse_float(row[2], line))
    return (np.asarray(term_of_row), np.asarray(hours), np.asarray(values))


def write_norm_table_csv(path, table, term_ids=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write("model,term_id,norm\n")
        for model, norms in table.items():
            ids = term_ids if term_ids is not None else range(1, len(norms) + 1)
            for t, v in zip(ids, norms):
                fh.write(f"{model},{t},{fnum(v)}\n")


def write_coefficients_csv(path, coeffs):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write("term_id,model,alpha\n")
        for bi, term_id in enumerate(coeffs.term_ids):
            for mi, model in enumerate(coeffs.models):
                fh.write(f"{term_id},{model},{fnum(coeffs.alphas[bi, mi])}\n")


def read_coefficients_csv(path):
    """-> {term_id: {model: alpha}} for CoefficientSet assembly."""
    rows = _read_rows(path, ["term_id", "model", "alpha"])
    out = {}
    for line, row in rows:
        term = int(_parse_float(row[0], line))
        out.setdefault(term, {})[row[1].strip()] = _parse_float(row[2], line)
    return out
