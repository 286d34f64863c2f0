import numpy as np
import pytest

from floodcast import io
from floodcast.dataset import GuidanceSeries
from floodcast.errors import FormatError, ParseError, ValidationError
from floodcast.features import GRID_CELLS, GridSeries
from floodcast.sstweights import MonthlyFeature, WeightSeries
from floodcast.synth import ScenarioSpec, gen_dataset
from floodcast.timeseries import HydroSeries


class TestTimestampText:
    def test_roundtrip(self):
        hour = io.text_to_hour("2019-06-01 00:00")
        assert io.hour_to_text(hour) == "2019-06-01 00:00"

    def test_subhourly_rejected(self):
        with pytest.raises(ParseError):
            io.text_to_hour("2019-06-01 00:30")

    def test_junk_rejected(self):
        with pytest.raises(ParseError):
            io.text_to_hour("junk")


class TestSeriesCsv:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(0)
        s = HydroSeries("inflow", 433000, rng.gamma(2.0, 5.0, 24))
        path = tmp_path / "inflow.csv"
        io.write_series_csv(path, s)
        back = io.read_series_csv(path, name="inflow")
        assert back.start == s.start
        np.testing.assert_array_equal(back.values, s.values)

    def test_mask_roundtrip(self, tmp_path):
        mask = np.array([True, False, True, True])
        s = HydroSeries("x", 0, np.array([1.0, np.nan, 3.0, 4.0]), mask)
        path = tmp_path / "x.csv"
        io.write_series_csv(path, s)
        back = io.read_series_csv(path)
        np.testing.assert_array_equal(back.mask, mask)
        np.testing.assert_array_equal(back.values[back.mask], s.values[mask])

    def test_gap_detected_with_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            "timestamp,value\n"
            "2019-06-01 00:00,1.0\n"
            "2019-06-01 01:00,2.0\n"
            "2019-06-01 03:00,3.0\n"
        )
        with pytest.raises(FormatError) as err:
            io.read_series_csv(path)
        assert err.value.line == 4

    def test_non_numeric_cell(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("timestamp,value\n2019-06-01 00:00,abc\n")
        with pytest.raises(ParseError) as err:
            io.read_series_csv(path)
        assert err.value.line == 2

    def test_wrong_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,val\n2019-06-01 00:00,1.0\n")
        with pytest.raises(FormatError):
            io.read_series_csv(path)

    def test_wellformed_24_rows(self, tmp_path):
        lines = ["timestamp,value"]
        for h in range(24):
            lines.append(f"2019-06-01 {h:02d}:00,{float(h)!r}")
        path = tmp_path / "day.csv"
        path.write_text("\n".join(lines) + "\n")
        s = io.read_series_csv(path)
        assert len(s) == 24


class TestOtherSchemas:
    def test_grid_roundtrip(self, tmp_path):
        rng = np.random.default_rng(1)
        grid = GridSeries(start=100, cells=rng.gamma(1.0, 1.0, (5, GRID_CELLS)))
        path = tmp_path / "grid.csv"
        io.write_grid_csv(path, grid)
        back = io.read_grid_csv(path)
        np.testing.assert_array_equal(back.cells, grid.cells)

    def test_guidance_roundtrip(self, tmp_path):
        rng = np.random.default_rng(2)
        g = GuidanceSeries(start=50, values=rng.gamma(1.0, 1.0, (6, 6)))
        path = tmp_path / "guidance.csv"
        io.write_guidance_csv(path, g)
        back = io.read_guidance_csv(path)
        np.testing.assert_array_equal(back.values, g.values)

    def test_monthly_features_roundtrip(self, tmp_path):
        rng = np.random.default_rng(3)
        feats = [MonthlyFeature(month=600 + i, vector=rng.normal(size=32)) for i in range(36)]
        path = tmp_path / "sst.csv"
        io.write_monthly_features_csv(path, feats)
        back = io.read_monthly_features_csv(path)
        assert len(back) == 36
        assert all(b.month == f.month for b, f in zip(back, feats))
        for b, f in zip(back, feats):
            np.testing.assert_array_equal(b.vector, f.vector)

    def test_monthly_features_wide(self, tmp_path):
        rng = np.random.default_rng(4)
        feats = [MonthlyFeature(month=600 + i, vector=rng.normal(size=4096)) for i in range(3)]
        path = tmp_path / "wide.csv"
        io.write_monthly_features_csv(path, feats)
        back = io.read_monthly_features_csv(path)
        assert back[0].vector.size == 4096

    def test_weights_roundtrip_exact(self, tmp_path):
        months = (600, 601, 602)
        ws = WeightSeries(months=months, monthly=np.array([1e-8, 0.5 + 1e-8, 1.0 + 1e-8]))
        path = tmp_path / "weights.csv"
        io.write_weights_csv(path, ws)
        back = io.read_weights_csv(path)
        assert back.monthly.tolist() == ws.monthly.tolist()

    def test_ingest_dispatch(self, tmp_path):
        with pytest.raises(ValidationError):
            io.ingest_csv(tmp_path / "x.csv", "nope")


class TestDatasetDirectory:
    def test_roundtrip(self, tmp_path):
        spec = ScenarioSpec(years=2, terms_per_year=1, test_terms=2, term_length=72,
                            sst_dim=8, seed=3)
        ds = gen_dataset(spec)
        io.write_dataset(ds, tmp_path / "data")
        back = io.read_dataset(tmp_path / "data")
        assert len(back.years) == 2
        assert tuple(t.term_id for t in back.terms) == tuple(t.term_id for t in ds.terms)
        for ya, yb in zip(ds.years, back.years):
            np.testing.assert_array_equal(
                ya.series["inflow"].values, yb.series["inflow"].values
            )
            np.testing.assert_array_equal(ya.grid.cells, yb.grid.cells)
        assert len(back.monthly_features) == len(ds.monthly_features)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(FormatError):
            io.read_dataset(tmp_path)


class TestPlotData:
    def test_column_schema(self, tmp_path):
        n = 5
        stamps = np.arange(100, 100 + n)
        actual = np.arange(n, dtype=float)
        per_model = {m: actual + i for i, m in enumerate(("kernel", "rfoob", "svm"))}
        path = io.emit_plotdata(tmp_path, 3, stamps, actual, per_model, actual * 2)
        lines = path.read_text().strip().split("\n")
        header = lines[0].split(",")
        # 3 base + 1 ensemble + timestamp and actual = 6 columns
        assert header == ["t", "actual", "kernel", "rfoob", "svm", "ensemble"]
        assert len(header) == 6
        assert len(lines) == n + 1

    def test_one_file_per_term(self, tmp_path):
        stamps = np.arange(3)
        vec = np.ones(3)
        for term in (1, 2, 3, 4, 5):
            io.emit_plotdata(tmp_path, term, stamps, vec, {"kernel": vec}, vec)
        assert len(list(tmp_path.glob("term_*.csv"))) == 5


class TestForecastCsv:
    def test_roundtrip(self, tmp_path):
        term_of_row = np.array([1, 1, 2, 2, 2])
        stamps = np.array([10, 11, 20, 21, 22])
        values = np.array([0.5, 1.5, 2.5, 3.5, 4.5])
        path = tmp_path / "f.csv"
        io.write_forecast_csv(path, term_of_row, stamps, values)
        t, s, v = io.read_forecast_csv(path)
        np.testing.assert_array_equal(t, term_of_row)
        np.testing.assert_array_equal(s, stamps)
        np.testing.assert_array_equal(v, values)


class TestCoefficientsCsv:
    def test_roundtrip(self, tmp_path):
        from floodcast.ensemble import CoefficientSet

        coeffs = CoefficientSet.uniform((7, 9), ("kernel", "rfoob", "svm"))
        path = tmp_path / "c.csv"
        io.write_coefficients_csv(path, coeffs)
        table = io.read_coefficients_csv(path)
        assert set(table) == {7, 9}
        assert abs(table[7]["kernel"] - 1 / 3) < 1e-15
