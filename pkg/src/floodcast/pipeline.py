"""End-to-end experiment orchestration.

Stages: data -> ocean weights -> design matrices -> tune/fit the three
base learners -> per-term forecasts -> l2-normalized combination ->
evaluation reports.  Every stage writes its artifacts under the run
directory; re-running with the same config and seed reproduces all
numeric artifacts byte for byte.

Test-term targets travel in a SealedTarget that only the evaluation
stage opens, so no earlier stage can touch them.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import ensemble as ens
from . import io, metrics, report
from .config import ExperimentConfig
from .dataset import Dataset
from .errors import ConfigError, ValidationError
from .features import (
    LagSpec,
    PcaReducer,
    accumulate_grid,
    ar_block,
    grid_moments_block,
    ma_block,
    stack_blocks,
    trapezoid_gradient,
    FeatureBlock,
)
from .learners import (
    fit_forest,
    fit_kernel,
    fit_svr,
    load_model,
    oob_importance,
    save_model,
    tune,
)
from .sstweights import WeightResult, derive_weights, silhouette
from .synth import FLOOD_MONTHS, gen_dataset
from .timeseries import DesignMatrix, calendar_month, month_index

MODEL_ORDER = ens.MODEL_ORDER  # ("kernel", "rfoob", "svm")


def derive_seed(root, name):
    """Named, stable integer stream seed below 2**31."""
    digest = hashlib.sha256(f"{root}:{name}".encode()).digest()
    return int.from_bytes(digest[:4], "big") % (2**31)


class SealedTarget:
    """Capability wrapper around test-term targets.

    Only the evaluation stage holds the opening key, which enforces the
    no-peeking rule between forecasting and scoring.
    """

    _KEY = "evaluate"

    def __init__(self, values):
        self._values = np.asarray(values, dtype=np.float64).copy()
        self._values.setflags(write=False)

    def open(self, stage):
        if stage != self._KEY:
            raise ValidationError(
                f"stage {stage!r} tried to read test targets before evaluation"
            )
        return self._values


# ----------------------------------------------------------------------
# feature building
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class SegmentTable:
    names: tuple
    values: np.ndarray
    valid: np.ndarray
    dummy_columns: frozenset


class FeatureBuilder:
    """Applies the config recipe over year segments and assembles designs.

    PCA projections (grid accumulation, guidance leads) are fitted on the
    training rows once, then frozen for every later transform, so test
    rows never leak into the loadings.
    """

    def __init__(self, params, lead_time, embedding_by_month=None):
        self.params = params
        self.lead = lead_time
        self.embedding_by_month = embedding_by_month
        self.accum_reducer = None
        self.guidance_reducer = None
        self._tables = {}

    # -- fitting -------------------------------------------------------

    def fit(self, dataset, train_terms):
        uses_accum = any(i["transform"] == "accum_pca" for i in self.params.recipe)
        uses_guidance = any(i["transform"] == "pca" for i in self.params.recipe)
        if not (uses_accum or uses_guidance):
            return self
        accum_rows, guidance_rows = [], []
        for term in train_terms:
            yd = dataset.segment_of(term)
            idx = term.hours - self.lead - yd.start
            ok = idx >= 0
            idx = idx[ok]
            if uses_accum:
                sums, valid = accumulate_grid(yd.grid, self.params.accum_horizon)
                keep = idx[valid[idx]]
                accum_rows.append(sums[keep])
            if uses_guidance:
                guidance_rows.append(yd.guidance.values[idx])
        if uses_accum:
            rows = np.vstack(accum_rows)
            self.accum_reducer = PcaReducer(
                var_threshold=self.params.accum_threshold,
                max_components=self.params.accum_max_components,
            ).fit(rows)
        if uses_guidance:
            rows = np.vstack(guidance_rows)
            self.guidance_reducer = PcaReducer(
                var_threshold=self.params.guidance_threshold
            ).fit(rows)
        return self

    # -- per-segment feature table --------------------------------------

    def _segment_table(self, yd):
        if yd.year in self._tables:
            return self._tables[yd.year]
        blocks = []
        dummies = set()
        for item in self.params.recipe:
            blk = self._apply(item, yd)
            if item["transform"] == "seasonal_dummies":
                dummies.update(blk.names)
            blocks.append(blk)
        stacked = stack_blocks(blocks)
        table = SegmentTable(
            names=stacked.names,
            values=stacked.values,
            valid=stacked.valid,
            dummy_columns=frozenset(dummies),
        )
        self._tables[yd.year] = table
        return table

    def _apply(self, item, yd):
        transform = item["transform"]
        source = item.get("source", "")
        p = self.params
        if transform == "ar":
            return ar_block(yd.series[source], LagSpec(item.get("p", p.ar_order)), name=source)
        if transform == "ma":
            return ma_block(yd.series[source], LagSpec(item.get("p", p.ar_order)), name=source)
        if transform == "raw":
            s = yd.series[source]
            return FeatureBlock(names=(source,), values=s.values[:, None], valid=s.mask)
        if transform == "gradient":
            return trapezoid_gradient(
                yd.series[source],
                window=item.get("window", p.gradient_window),
                mode=item.get("mode", p.gradient_mode),
                name=source,
            )
        if transform == "moments":
            return grid_moments_block(yd.grid)
        if transform == "accum_pca":
            if self.accum_reducer is None:
                raise ConfigError("accum_pca transform used before builder fit")
            sums, valid = accumulate_grid(yd.grid, p.accum_horizon)
            scores = np.full((sums.shape[0], self.accum_reducer.n_components), np.nan)
            scores[valid] = self.accum_reducer.transform(sums[valid])
            names = tuple(f"accum_rain_pc{i + 1}" for i in range(scores.shape[1]))
            return FeatureBlock(names=names, values=scores, valid=valid)
        if transform == "pca":
            if self.guidance_reducer is None:
                raise ConfigError("guidance pca transform used before builder fit")
            scores = self.guidance_reducer.transform(yd.guidance.values)
            names = tuple(f"guidance_pc{i + 1}" for i in range(scores.shape[1]))
            return FeatureBlock(
                names=names, values=scores, valid=np.ones(scores.shape[0], dtype=bool)
            )
        if transform == "seasonal_dummies":
            # dummy of the target hour: rows outside the season are flagged
            # invalid rather than rejected (segment tails may cross over)
            target_hours = np.arange(yd.start, yd.end + 1) + self.lead
            months = calendar_month(target_hours)
            values = np.column_stack(
                [(months == m).astype(np.float64) for m in FLOOD_MONTHS]
            )
            names = tuple(f"month_{m}" for m in FLOOD_MONTHS)
            return FeatureBlock(
                names=names, values=values, valid=np.isin(months, FLOOD_MONTHS)
            )
        if transform == "embedding":
            if self.embedding_by_month is None:
                raise ConfigError(
                    "recipe asks for sea_temp embedding but no monthly features exist"
                )
            target_hours = np.arange(yd.start, yd.end + 1) + self.lead
            months = month_index(target_hours)
            values = np.full((months.size, 3), np.nan)
            valid = np.zeros(months.size, dtype=bool)
            for i, m in enumerate(months):
                vec = self.embedding_by_month.get(int(m))
                if vec is not None:
                    values[i] = vec
                    valid[i] = True
            names = ("sea_temp_1", "sea_temp_2", "sea_temp_3")
            return FeatureBlock(names=names, values=values, valid=valid)
        raise ConfigError(f"unknown transform {transform!r}")

    # -- design assembly -------------------------------------------------

    def design_for(self, dataset, terms, weight_series=None, seal_target=False):
        """DesignMatrix over the terms' hours (row = target hour).

        Returns (design, sealed_target_or_none); when sealing, design.y
        is a zero placeholder and the real targets ride in the seal.
        """
        table_names = None
        dummy_columns = frozenset()
        xs, ys, ws, term_of_row, stamps = [], [], [], [], []
        for term in terms:
            yd = dataset.segment_of(term)
            table = self._segment_table(yd)
            table_names = table.names
            dummy_columns = table.dummy_columns
            tau = term.hours
            idx = tau - self.lead - yd.start
            in_range = idx >= 0
            inflow = yd.series["inflow"]
            target_ok = inflow.mask[tau - yd.start]
            ok = in_range & target_ok
            ok[in_range] &= table.valid[idx[in_range]]
            idx, tau = idx[ok], tau[ok]
            if idx.size == 0:
                continue
            xs.append(table.values[idx])
            ys.append(inflow.values[tau - yd.start])
            term_of_row.append(np.full(idx.size, term.term_id, dtype=np.int64))
            stamps.append(tau)
            if weight_series is not None:
                mapping = weight_series.as_mapping()
                months = month_index(tau)
                try:
                    ws.append(np.asarray([mapping[int(m)] for m in months]))
                except KeyError as exc:
                    raise ConfigError(f"no monthly weight for month index {exc}") from None
            else:
                ws.append(np.ones(idx.size))
        if not xs:
            raise ValidationError("no valid design rows for the requested terms")
        X = np.vstack(xs)
        y = np.concatenate(ys)
        w = np.concatenate(ws)
        term_of_row = np.concatenate(term_of_row)
        stamps = np.concatenate(stamps)
        sealed = None
        if seal_target:
            sealed = SealedTarget(y)
            y = np.zeros_like(y)
        design = DesignMatrix(
            column_names=table_names,
            X=X,
            y=y,
            w=w,
            term_of_row=term_of_row,
            timestamps=stamps,
            dummy_columns=dummy_columns,
        )
        return design, sealed


def design_fingerprint(design):
    h = hashlib.sha256()
    h.update(",".join(design.column_names).encode())
    for arr in (design.X, design.y, design.w, design.term_of_row):
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()


# ----------------------------------------------------------------------
# stages
# ----------------------------------------------------------------------

def stage_data(config):
    if config.source == "synth":
        dataset = gen_dataset(config.scenario)
    else:
        dataset = io.read_dataset(config.data_dir)
    train_years, test_year = config.resolved_split()
    train_terms, test_terms = dataset.split(train_years, test_year)
    return dataset, train_terms, test_terms


def stage_ocean(config, dataset):
    """Derive the ocean embedding and monthly weights (when features exist)."""
    if not dataset.monthly_features:
        return None
    return derive_weights(
        dataset.monthly_features,
        seed=derive_seed(config.seed, "tsne") if config.weights.tsne_seed == 0
        else config.weights.tsne_seed,
        perplexity=config.weights.perplexity,
        epsilon=config.weights.epsilon,
    )


def write_ocean_artifacts(result, wdir):
    """weights.csv, embedding.csv and the cluster-quality report."""
    wdir = Path(wdir)
    io.write_weights_csv(wdir / "weights.csv", result.weights)
    _write_embedding_csv(wdir / "embedding.csv", result)
    months = np.asarray(result.weights.months)
    labels = np.isin(months % 12 + 1, FLOOD_MONTHS).astype(int)
    sil = silhouette(result.embedding, labels) if len(set(labels.tolist())) > 1 else None
    (wdir / "silhouette.json").write_text(
        json.dumps(
            {
                "flood_vs_nonflood_silhouette": sil,
                "kl_initial": result.kl_initial,
                "kl_final": result.kl_final,
                "explained_ratio_first": float(result.explained_ratio[0]),
            },
            indent=2,
            sort_keys=True,
        )
        + "\n"
    )


def _write_embedding_csv(path, result):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    from .timeseries import month_label

    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write("month,v1,v2,v3\n")
        for month, row in zip(result.weights.months, result.embedding):
            fh.write(month_label(month) + "," + ",".join(io.fnum(v) for v in row) + "\n")


def build_designs(config, dataset, train_terms, test_terms, ocean, weighted):
    embedding = None
    if ocean is not None:
        embedding = {m: ocean.embedding[i] for i, m in enumerate(ocean.weights.months)}
    builder = FeatureBuilder(config.features, config.lead_time, embedding_by_month=embedding)
    builder.fit(dataset, train_terms)
    weight_series = ocean.weights if (weighted and ocean is not None) else None
    if weighted and ocean is None:
        raise ConfigError("weighting requested but the dataset has no monthly features")
    train_design, _ = builder.design_for(dataset, train_terms, weight_series)
    test_design, sealed = builder.design_for(dataset, test_terms, weight_series,
                                             seal_target=True)
    return builder, train_design, test_design, sealed


def stage_train(config, train_design, rundir):
    """Tune (within budget) and fit the three base learners."""
    rundir = Path(rundir)
    X, y, w = train_design.X, train_design.y, train_design.w
    names = train_design.column_names
    term_of_row = train_design.term_of_row
    lp = config.learners
    models, tune_logs = {}, {}

    kernel_seed = derive_seed(config.seed, "kernel")

    def kernel_fitter(spec, Xf, yf, wf):
        return fit_kernel(Xf, yf, wf, spec, seed=kernel_seed)

    spec = lp.kernel_spec
    if lp.kernel_budget > 1 and lp.kernel_space:
        res = tune(kernel_fitter, X, y, w, lp.kernel_space, lp.kernel_budget,
                   base_spec=spec, seed=derive_seed(config.seed, "tune-kernel"),
                   term_of_row=term_of_row, n_folds=lp.n_folds, method=lp.tuner_method)
        spec, tune_logs["kernel"] = res.best_spec, res.log
    models["kernel"] = fit_kernel(X, y, w, spec, seed=kernel_seed, column_names=names)

    forest_spec = lp.forest_spec
    if forest_spec.seed == 0:
        forest_spec = dataclasses.replace(forest_spec, seed=derive_seed(config.seed, "forest"))

    def forest_fitter(spec_, Xf, yf, wf):
        return fit_forest(Xf, yf, wf, spec_)

    if lp.forest_budget > 1 and lp.forest_space:
        res = tune(forest_fitter, X, y, w, lp.forest_space, lp.forest_budget,
                   objective="oob", base_spec=forest_spec,
                   seed=derive_seed(config.seed, "tune-forest"))
        forest_spec, tune_logs["rfoob"] = res.best_spec, res.log
    models["rfoob"] = fit_forest(X, y, w, forest_spec, column_names=names)

    def svm_fitter(spec_, Xf, yf, wf):
        return fit_svr(Xf, yf, wf, spec_)

    svm_spec = lp.svm_spec
    if lp.svm_budget > 1 and lp.svm_space:
        res = tune(svm_fitter, X, y, w, lp.svm_space, lp.svm_budget,
                   base_spec=svm_spec, seed=derive_seed(config.seed, "tune-svm"),
                   term_of_row=term_of_row, n_folds=lp.n_folds, method=lp.tuner_method)
        svm_spec, tune_logs["svm"] = res.best_spec, res.log
    models["svm"] = fit_svr(X, y, w, svm_spec, column_names=names)

    for tag, model in models.items():
        save_model(model, rundir / "models" / tag)
    for tag, log in tune_logs.items():
        _write_tune_log(rundir / "tuning" / f"{tag}_log.csv", log)
    (rundir / "design_fingerprints.json").write_text(
        json.dumps({"train": design_fingerprint(train_design)}, indent=2, sort_keys=True) + "\n"
    )
    return models


def _write_tune_log(path, log):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write("candidate,params,objective,error\n")
        for entry in log:
            params = json.dumps(entry["params"], sort_keys=True).replace(",", ";")
            obj = io.fnum(entry["objective"]) if "objective" in entry else ""
            err = entry.get("error", "").replace(",", ";")
            fh.write(f"{entry['candidate']},\"{params}\",{obj},\"{err}\"\n")


def stage_forecast(config, models, test_design, rundir):
    rundir = Path(rundir)
    outputs = []
    for tag in MODEL_ORDER:
        pred = models[tag].predict(test_design.X, column_names=test_design.column_names)
        io.write_forecast_csv(
            rundir / "forecasts" / f"{tag}.csv",
            test_design.term_of_row, test_design.timestamps, pred,
        )
        outputs.append(ens.ModelOutput.from_rows(tag, pred, test_design.term_of_row))
    return outputs


def _batch_coefficients(config, term_ids):
    if config.ensemble.coefficients_path:
        table = io.read_coefficients_csv(config.ensemble.coefficients_path)
        alphas = np.array(
            [[table[t][m] for m in MODEL_ORDER] for t in term_ids], dtype=np.float64
        )
        return ens.CoefficientSet(term_ids=tuple(term_ids), models=MODEL_ORDER, alphas=alphas)
    return ens.CoefficientSet.uniform(tuple(term_ids), MODEL_ORDER)


def _per_term_split(flat, outputs):
    """Split a whole-range vector back into the outputs' term layout."""
    pieces, cursor = [], 0
    for v in outputs[0].vectors:
        pieces.append(flat[cursor : cursor + v.size])
        cursor += v.size
    return pieces


def ensemble_variants(config, outputs):
    """All combination variants, keyed by report name."""
    term_ids = outputs[0].term_ids
    table = ens.norm_table(outputs)
    ms = ens.median_sigma_coeffs(table)
    variants = {}
    coeff_sets = {}

    a_global = np.asarray(config.ensemble.global_coefficients)
    variants["l2"] = _per_term_split(ens.global_ensemble(outputs, a_global), outputs)
    coeff_sets["l2"] = ens.CoefficientSet.common(term_ids, MODEL_ORDER, a_global)

    ms_coeffs = ens.CoefficientSet.common(term_ids, MODEL_ORDER, ms.coefficients)
    variants["median_sigma"] = ens.batch_ensemble(outputs, ms_coeffs)
    coeff_sets["median_sigma"] = ms_coeffs

    batch_coeffs = _batch_coefficients(config, term_ids)
    variants["batch"] = ens.batch_ensemble(outputs, batch_coeffs)
    coeff_sets["batch"] = batch_coeffs
    return variants, coeff_sets, table, ms


def stage_ensemble(config, outputs, rundir):
    rundir = Path(rundir)
    variants, coeff_sets, table, ms = ensemble_variants(config, outputs)
    selected = config.ensemble.variant
    chosen_coeffs = coeff_sets["l2"] if selected == "global" else coeff_sets[selected]

    io.write_norm_table_csv(rundir / "ensemble" / "norm_table.csv", table,
                            term_ids=outputs[0].term_ids)
    io.write_coefficients_csv(rundir / "ensemble" / "coefficients.csv", chosen_coeffs)
    (rundir / "ensemble" / "median_sigma.json").write_text(
        json.dumps(
            {
                "models": list(ms.models),
                "raw": [float(v) for v in ms.raw],
                "coefficients": [float(v) for v in ms.coefficients],
            },
            indent=2,
            sort_keys=True,
        )
        + "\n"
    )
    return variants, coeff_sets


def stage_evaluate(config, outputs, variants, coeff_sets, test_design, sealed,
                   rundir, weighting):
    rundir = Path(rundir)
    y = sealed.open("evaluate")
    term_of_row = test_design.term_of_row
    term_ids = outputs[0].term_ids
    selected = "l2" if config.ensemble.variant == "global" else config.ensemble.variant

    io.write_forecast_csv(
        rundir / "ensemble" / "forecast.csv",
        term_of_row, test_design.timestamps, np.concatenate(variants[selected]),
    )

    reports = []
    for out in outputs:
        reports.append(metrics.skill_report(out.model, out.concatenated(), y, term_of_row))
    for name in ("l2", "median_sigma", "batch"):
        reports.append(
            metrics.skill_report(name, np.concatenate(variants[name]), y, term_of_row)
        )
    if config.ensemble.oracle_grid_step:
        actual_terms = [y[term_of_row == t] for t in term_ids]
        oracle = ens.grid_search_term_coeffs(outputs, actual_terms,
                                             step=config.ensemble.oracle_grid_step)
        oracle_vec = np.concatenate(ens.batch_ensemble(outputs, oracle))
        reports.append(metrics.skill_report("batch_oracle", oracle_vec, y, term_of_row))
        io.write_coefficients_csv(rundir / "evaluate" / "coefficients_oracle.csv", oracle)

    report.write_skill_csv(rundir / "evaluate" / "skill_report.csv", reports, weighting)
    rows = report.grid_rows([r for r in reports if r.variant != "batch_oracle"], selected)
    report.write_grid_csv(rundir / "evaluate" / "table_grid.csv", {weighting: rows})

    checks = []
    coeffs = coeff_sets[selected]
    for bi, term_id in enumerate(term_ids):
        rows_b = term_of_row == term_id
        base = [out.vectors[bi] for out in outputs]
        checks.append(
            (term_id, metrics.check_proposition1(base, y[rows_b], coeffs.alphas[bi]))
        )
    report.write_prop1_csv(rundir / "evaluate" / "prop1_check.csv", checks)

    per_model_all = {out.model: out.concatenated() for out in outputs}
    for bi, term_id in enumerate(term_ids):
        rows_b = term_of_row == term_id
        per_model = {m: per_model_all[m][rows_b] for m in per_model_all}
        io.emit_plotdata(
            rundir / "plotdata", term_id, test_design.timestamps[rows_b],
            y[rows_b], per_model, variants[selected][bi],
        )
        if config.render_figures:
            figdir = rundir / "figures"
            figdir.mkdir(parents=True, exist_ok=True)
            report.render_term_figure(
                figdir / f"term_{int(term_id):03d}.png", term_id,
                test_design.timestamps[rows_b], y[rows_b], per_model,
                variants[selected][bi],
            )
    return reports, rows


def stage_importance(config, models, train_design, rundir):
    rundir = Path(rundir)
    result = oob_importance(
        models["rfoob"], train_design.X, train_design.y, w=train_design.w,
        n_repeats=config.importance_repeats,
        seed=derive_seed(config.seed, "importance"),
        column_names=train_design.column_names,
    )
    report.write_importance_csv(rundir / "evaluate" / "importance.csv", result)
    return result


# ----------------------------------------------------------------------
# full run
# ----------------------------------------------------------------------

def run_single(config, rundir, weighted, shared=None):
    """One weighting setting end to end; returns its report artifacts."""
    rundir = Path(rundir)
    rundir.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    timings = {}

    if shared is None:
        dataset, train_terms, test_terms = stage_data(config)
        ocean = stage_ocean(config, dataset)
        shared = (dataset, train_terms, test_terms, ocean)
    else:
        dataset, train_terms, test_terms, ocean = shared
    if ocean is not None:
        write_ocean_artifacts(ocean, rundir / "weights")
    timings["data"] = time.time() - t0

    t1 = time.time()
    builder, train_design, test_design, sealed = build_designs(
        config, dataset, train_terms, test_terms, ocean, weighted
    )
    timings["design"] = time.time() - t1

    t2 = time.time()
    models = stage_train(config, train_design, rundir)
    timings["train"] = time.time() - t2

    t3 = time.time()
    outputs = stage_forecast(config, models, test_design, rundir)
    variants, coeff_sets = stage_ensemble(config, outputs, rundir)
    weighting = "ws_on" if weighted else "never"
    reports, grid = stage_evaluate(
        config, outputs, variants, coeff_sets, test_design, sealed, rundir, weighting
    )
    importance = stage_importance(config, models, train_design, rundir)
    timings["evaluate"] = time.time() - t3

    if config.render_figures and ocean is not None:
        report.render_weights_figure(rundir / "figures" / "weights.png", ocean.weights)
        report.render_embedding_figure(
            rundir / "figures" / "embedding.png", ocean.embedding,
            np.asarray(ocean.weights.months),
        )

    (rundir / "log.txt").write_text(
        "".join(f"{k}: {v:.2f} s\n" for k, v in timings.items())
    )
    meta = {
        "weighting": weighting,
        "seed": config.seed,
        "lead_time": config.lead_time,
        "train_rows": int(train_design.n_rows),
        "test_rows": int(test_design.n_rows),
        "columns": list(train_design.column_names),
        "ensemble_variant": config.ensemble.variant,
    }
    (rundir / "run_meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return {
        "grid": grid,
        "reports": reports,
        "importance": importance,
        "models": models,
        "shared": shared,
    }


def run_pipeline(config):
    """Full experiment per the config; returns the artifact directory."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    mode = config.weights.mode
    if mode == "both":
        never = run_single(config, out / "never", weighted=False)
        ws_on = run_single(config, out / "ws_on", weighted=True, shared=never["shared"])
        report.write_grid_csv(
            out / "table_grid.csv",
            {"never": never["grid"], "ws_on": ws_on["grid"]},
        )
        if config.render_figures:
            report.render_importance_figure(
                out / "importance_comparison.png",
                {"never": never["importance"], "ws_on": ws_on["importance"]},
            )
    else:
        run_single(config, out, weighted=(mode == "on"))
    return out


# ----------------------------------------------------------------------
# stage re-entry from disk (piecewise CLI subcommands)
# ----------------------------------------------------------------------

def load_models(rundir):
    rundir = Path(rundir)
    return {tag: load_model(rundir / "models" / tag) for tag in MODEL_ORDER}


def rebuild_state(config, weighted):
    """Recreate dataset and designs deterministically from the config."""
    dataset, train_terms, test_terms = stage_data(config)
    ocean = stage_ocean(config, dataset)
    builder, train_design, test_design, sealed = build_designs(
        config, dataset, train_terms, test_terms, ocean, weighted
    )
    return dataset, ocean, train_design, test_design, sealed
