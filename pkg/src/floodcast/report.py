"""Evaluation reports: skill CSVs, the comparison grid, and figures.

Figures are rendered with the Agg backend straight to PNG next to the
delimited output; they are presentation artifacts and sit outside the
byte-exact reproducibility guarantee (which covers the numeric CSV/JSON
files).
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import fnum, hour_to_text

GRID_VARIANTS = ("kernel", "rfoob", "svm", "l2", "median_sigma", "batch", "all")

_RC = {
    "figure.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
    "axes.titlesize": 10,
}


def write_skill_csv(path, reports, weighting):
    """One row per (variant, term|all): fcd, rmse, mae, sim, norms.

    A JSON twin with the same content is written next to the CSV.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fields = ("fcd", "rmse", "mae", "sim", "norm_forecast", "norm_actual")
    tree = {}
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write("variant,weighting,term," + ",".join(fields) + "\n")
        for rep in reports:
            for term, vals in rep.rows():
                cells = [rep.variant, weighting, term]
                cells += [fnum(vals[f]) for f in fields]
                fh.write(",".join(cells) + "\n")
                tree.setdefault(rep.variant, {})[term] = {
                    f: float(vals[f]) for f in fields
                }
    path.with_suffix(".json").write_text(
        json.dumps({"weighting": weighting, "skill": tree}, indent=2, sort_keys=True) + "\n"
    )


def grid_rows(reports, selected_variant):
    """Comparison-grid cells: per-variant means over terms, then the
    pooled 'all' row taken from the selected ensemble variant."""
    by_variant = {rep.variant: rep for rep in reports}
    rows = []
    for variant in GRID_VARIANTS[:-1]:
        rep = by_variant[variant]
        cells = {
            metric: float(np.mean([vals[metric] for vals in rep.per_term.values()]))
            for metric in ("fcd", "rmse", "mae")
        }
        rows.append((variant, cells))
    pooled = by_variant[selected_variant].pooled
    rows.append(("all", {m: pooled[m] for m in ("fcd", "rmse", "mae")}))
    return rows


def write_grid_csv(path, rows_by_weighting):
    """rows_by_weighting: {'never'|'ws_on': grid_rows(...)}."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write("variant,weighting,fcd,rmse,mae\n")
        for variant in GRID_VARIANTS:
            for weighting in ("never", "ws_on"):
                if weighting not in rows_by_weighting:
                    continue
                cells = dict(rows_by_weighting[weighting])[variant]
                fh.write(
                    f"{variant},{weighting},{fnum(cells['fcd'])},"
                    f"{fnum(cells['rmse'])},{fnum(cells['mae'])}\n"
                )


def write_prop1_csv(path, checks):
    """checks: list of (term_id, Prop1Report)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write("term_id,lhs,rhs,holds,strict,degenerate\n")
        for term_id, rep in checks:
            rhs = "" if rep.degenerate else fnum(rep.rhs)
            fh.write(
                f"{term_id},{fnum(rep.lhs)},{rhs},{int(rep.holds)},"
                f"{int(rep.strict)},{int(rep.degenerate)}\n"
            )


def write_importance_csv(path, result):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write("predictor,raw,importance\n")
        for name, raw, imp in zip(result.names, result.raw, result.importance):
            fh.write(f"{name},{fnum(raw)},{fnum(imp)}\n")


# ----------------------------------------------------------------------
# figures
# ----------------------------------------------------------------------

def render_term_figure(path, term_id, timestamps, actual, per_model, ensemble_vec):
    """Forecast-vs-actual hydrograph for one flood term."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(8, 3.2))
        hours = np.arange(len(actual))
        ax.plot(hours, actual, color="black", lw=1.8, label="actual")
        for name, vec in per_model.items():
            ax.plot(hours, vec, lw=0.9, alpha=0.8, label=name)
        ax.plot(hours, ensemble_vec, color="crimson", lw=1.4, label="ensemble")
        ax.set_xlabel(f"hours from {hour_to_text(timestamps[0])}")
        ax.set_ylabel("inflow")
        ax.set_title(f"flood term {term_id}: 6-h lead forecasts")
        ax.legend(loc="upper right", fontsize=7)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def render_importance_figure(path, results_by_weighting):
    """Per-predictor importance bars, one series per weighting setting."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(9, 3.4))
        offsets = np.linspace(-0.2, 0.2, num=max(len(results_by_weighting), 1))
        width = 0.4 / max(len(results_by_weighting), 1)
        names = None
        for off, (label, result) in zip(offsets, results_by_weighting.items()):
            names = result.names
            x = np.arange(len(names))
            ax.bar(x + off, result.importance, width=width, label=label)
        if names:
            ax.set_xticks(np.arange(len(names)))
            ax.set_xticklabels(names, rotation=90, fontsize=5)
        ax.set_ylabel("OOB importance")
        ax.set_title("permutation predictor importance")
        ax.legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def render_weights_figure(path, weights):
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(8, 2.8))
        x = np.arange(len(weights.months))
        ax.bar(x, weights.monthly, color="steelblue")
        labels = [f"{m % 12 + 1:02d}/{1970 + m // 12}" for m in weights.months]
        step = max(1, len(labels) // 24)
        ax.set_xticks(x[::step])
        ax.set_xticklabels(labels[::step], rotation=90, fontsize=5)
        ax.set_ylabel("monthly weight")
        ax.set_title("sea-surface sample weights")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def render_embedding_figure(path, embedding, months):
    """3-D embedding projected to its first two axes, flood months marked."""
    months = np.asarray(months)
    flood = np.isin(months % 12 + 1, (6, 7, 8, 9, 10))
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4.2, 4.0))
        ax.scatter(embedding[flood, 0], embedding[flood, 1], c="crimson",
                   s=18, label="flood months")
        ax.scatter(embedding[~flood, 0], embedding[~flood, 1], c="steelblue",
                   s=18, label="other months")
        ax.set_xlabel("embedding axis 1")
        ax.set_ylabel("embedding axis 2")
        ax.set_title("monthly ocean-feature embedding")
        ax.legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
