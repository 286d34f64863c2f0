import numpy as np
import pytest

from floodcast.errors import ValidationError
from floodcast.sstweights import derive_weights, silhouette, tsne_embed
from floodcast.synth import ScenarioSpec, gen_dataset, gen_hydrograph, gen_rainfall, gen_sst_features
from floodcast.timeseries import calendar_month


def small_spec(**kw):
    base = dict(years=2, terms_per_year=2, test_terms=2, term_length=96,
                sst_dim=32, seed=0)
    base.update(kw)
    return ScenarioSpec(**base)


class TestHydrograph:
    def test_single_noiseless_peak_unimodal(self):
        spec = small_spec(years=2, terms_per_year=1, test_terms=1,
                          peak_counts=(1,), noise_level=0.0,
                          peak_range=(500.0, 500.0))
        inflows, terms = gen_hydrograph(spec)
        assert len(inflows) == 2
        flow = inflows[0].values
        assert abs(flow.max() - 500.0) < 1e-9
        peak = int(np.argmax(flow))
        assert (np.diff(flow[:peak]) >= -1e-12).all()

    def test_deterministic(self):
        spec = small_spec()
        a, t1 = gen_hydrograph(spec)
        b, t2 = gen_hydrograph(spec)
        for sa, sb in zip(a, b):
            assert np.array_equal(sa.values, sb.values)
        assert tuple(t1) == tuple(t2)

    def test_peak_level_config(self):
        spec = small_spec(peak_range=(1750.0, 1750.0), noise_level=0.02)
        inflows, _ = gen_hydrograph(spec)
        peak = max(s.values.max() for s in inflows)
        assert abs(peak - 1750.0) < 0.05 * 1750.0

    def test_terms_inside_flood_season(self):
        spec = small_spec(years=3, terms_per_year=5, test_terms=5)
        _, terms = gen_hydrograph(spec)
        for term in terms:
            months = set(calendar_month(term.hours).tolist())
            assert months <= {6, 7, 8, 9, 10}

    def test_nonnegative(self):
        inflows, _ = gen_hydrograph(small_spec(noise_level=0.1))
        for s in inflows:
            assert (s.values >= 0).all()


class TestRainfall:
    def test_cross_correlation_peaks_at_lag(self):
        spec = small_spec(noise_level=0.0, lag_hours=6, terms_per_year=1, test_terms=1,
                          peak_counts=(1,))
        inflows, _ = gen_hydrograph(spec)
        basin, _, _, _ = gen_rainfall(inflows[0], spec, year_index=0)
        flow = inflows[0].values - spec.baseflow
        rain = basin.values
        # argmax of cross-correlation oracle over candidate lags
        lags = range(0, 13)
        scores = [float(np.dot(rain[: len(rain) - l], flow[l:])) for l in lags]
        assert int(np.argmax(scores)) == spec.lag_hours

    def test_zero_noise_guidance_is_shifted_rain(self):
        spec = small_spec(noise_level=0.0)
        inflows, _ = gen_hydrograph(spec)
        basin, _, _, guidance = gen_rainfall(inflows[0], spec, year_index=0)
        rain = basin.values
        for h in range(1, 7):
            expect = np.concatenate([rain[h:], np.full(h, rain[-1])])
            np.testing.assert_allclose(guidance.values[:, h - 1], expect, rtol=1e-12)

    def test_grid_sum_tracks_basin_rain(self):
        spec = small_spec(noise_level=0.0)
        inflows, _ = gen_hydrograph(spec)
        basin, _, grid, _ = gen_rainfall(inflows[0], spec, year_index=0)
        sums = grid.cells.sum(axis=1)
        expect = basin.values * 400.0
        wet = expect > 20.0
        assert np.all(np.abs(sums[wet] - expect[wet]) / expect[wet] < 0.15)


class TestSstFeatures:
    def test_cardinality_and_width(self):
        feats = gen_sst_features(36, seed=0, k=4096)
        assert len(feats) == 36
        assert all(f.vector.size == 4096 for f in feats)

    def test_high_separation_clusters_downstream(self):
        feats = gen_sst_features(36, seed=1, k=64, separation=10.0)
        emb = tsne_embed(feats, dims=3, seed=0)
        labels = np.array([1 if (f.month % 12 + 1) in (6, 7, 8, 9, 10) else 0 for f in feats])
        assert silhouette(emb, labels) > 0.5

    def test_zero_separation_negative_control(self):
        feats = gen_sst_features(36, seed=2, k=64, separation=0.0, within_spread=0.0)
        emb = tsne_embed(feats, dims=3, seed=0)
        labels = np.array([1 if (f.month % 12 + 1) in (6, 7, 8, 9, 10) else 0 for f in feats])
        assert silhouette(emb, labels) < 0.2

    def test_feeds_weight_pipeline(self):
        feats = gen_sst_features(24, seed=3, k=32, separation=4.0)
        res = derive_weights(feats, seed=0)
        assert res.weights.monthly.size == 24
        assert (res.weights.monthly > 0).all()

    def test_needs_a_year(self):
        with pytest.raises(ValidationError):
            gen_sst_features(6)


class TestDataset:
    def test_structure(self):
        ds = gen_dataset(small_spec())
        assert len(ds.years) == 2
        assert len(ds.monthly_features) == 24
        for yd in ds.years:
            assert set(yd.series) >= {"inflow", "water_height", "gauge_1", "vp_1"}
            n = len(yd.series["inflow"])
            assert len(yd.grid) == n and len(yd.guidance) == n

    def test_split(self):
        spec = small_spec(years=3)
        ds = gen_dataset(spec)
        train, test = ds.split(spec.train_years, spec.test_year)
        assert len(test) == spec.test_terms
        assert len(train) == (spec.years - 1) * spec.terms_per_year

    def test_pure_function_of_seed(self):
        a = gen_dataset(small_spec(seed=42))
        b = gen_dataset(small_spec(seed=42))
        for ya, yb in zip(a.years, b.years):
            assert np.array_equal(ya.grid.cells, yb.grid.cells)
            assert np.array_equal(ya.series["inflow"].values, yb.series["inflow"].values)
        c = gen_dataset(small_spec(seed=43))
        assert not np.array_equal(
            a.years[0].series["inflow"].values, c.years[0].series["inflow"].values
        )
