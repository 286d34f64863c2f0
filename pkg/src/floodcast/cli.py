"""Command-line interface.

Subcommands cover the full experiment (`run`) and its individual stages
(`synth`, `weights`, `train`, `forecast`, `ensemble`, `evaluate`,
`importance`), plus the standalone skill-dominance sweep (`prop-check`).
"""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import ensemble as ens
from . import io, metrics, pipeline
from .config import load_config
from .errors import FloodcastError
from .sstweights import derive_weights
from .synth import ScenarioSpec, gen_dataset


@click.group()
def main():
    """Dam-inflow forecasting with l2-normalized ensembles and ocean weights."""


def _load(config_path, output=None):
    cfg = load_config(config_path)
    if output is not None:
        cfg = dataclasses.replace(cfg, output_dir=str(output))
    return cfg


def _echo_errors(fn):
    try:
        return fn()
    except FloodcastError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


@main.command()
@click.option("--out", required=True, type=click.Path())
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--years", type=int, default=13, show_default=True)
@click.option("--terms-per-year", type=int, default=3, show_default=True)
@click.option("--test-terms", type=int, default=5, show_default=True)
@click.option("--term-length", type=int, default=120, show_default=True)
@click.option("--noise", type=float, default=0.05, show_default=True)
@click.option("--sst-dim", type=int, default=256, show_default=True)
@click.option("--sst-separation", type=float, default=6.0, show_default=True)
def synth(out, seed, years, terms_per_year, test_terms, term_length, noise,
          sst_dim, sst_separation):
    """Generate a synthetic dataset directory."""

    def go():
        spec = ScenarioSpec(
            seed=seed, years=years, terms_per_year=terms_per_year,
            test_terms=test_terms, term_length=term_length, noise_level=noise,
            sst_dim=sst_dim, sst_separation=sst_separation,
        )
        dataset = gen_dataset(spec)
        io.write_dataset(dataset, out)
        click.echo(f"dataset written to {out} "
                   f"({len(dataset.years)} years, {len(dataset.terms)} terms)")

    _echo_errors(go)


@main.command()
@click.option("--features", "features_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--perplexity", type=float, default=None)
@click.option("--epsilon", type=float, default=1e-8, show_default=True)
def weights(features_path, out, seed, perplexity, epsilon):
    """Monthly feature vectors -> standardized hourly-expandable weights."""

    def go():
        feats = io.read_monthly_features_csv(features_path)
        result = derive_weights(feats, seed=seed, perplexity=perplexity, epsilon=epsilon)
        pipeline.write_ocean_artifacts(result, out)
        click.echo(f"weights for {len(feats)} months written to {out}")

    _echo_errors(go)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None)
def train(config_path, out):
    """Build designs, tune within budget, fit and persist the base models."""

    def go():
        cfg = _load(config_path, out)
        weighted = cfg.weights.mode != "off"
        _, _, train_design, _, _ = pipeline.rebuild_state(cfg, weighted)
        rundir = Path(cfg.output_dir)
        rundir.mkdir(parents=True, exist_ok=True)
        pipeline.stage_train(cfg, train_design, rundir)
        click.echo(f"models written to {rundir / 'models'}")

    _echo_errors(go)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--run", "rundir", required=True, type=click.Path(exists=True))
def forecast(config_path, rundir):
    """Predict the test terms with the persisted models."""

    def go():
        cfg = _load(config_path, rundir)
        weighted = cfg.weights.mode != "off"
        _, _, _, test_design, _ = pipeline.rebuild_state(cfg, weighted)
        models = pipeline.load_models(rundir)
        pipeline.stage_forecast(cfg, models, test_design, rundir)
        click.echo(f"forecasts written to {Path(rundir) / 'forecasts'}")

    _echo_errors(go)


def _outputs_from_disk(rundir):
    outputs = []
    for tag in pipeline.MODEL_ORDER:
        term_of_row, _, values = io.read_forecast_csv(Path(rundir) / "forecasts" / f"{tag}.csv")
        outputs.append(ens.ModelOutput.from_rows(tag, values, term_of_row))
    return outputs


@main.command("ensemble")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--run", "rundir", required=True, type=click.Path(exists=True))
def ensemble_cmd(config_path, rundir):
    """Combine persisted forecasts into the configured ensemble variant."""

    def go():
        cfg = _load(config_path, rundir)
        outputs = _outputs_from_disk(rundir)
        pipeline.stage_ensemble(cfg, outputs, rundir)
        click.echo(f"ensemble artifacts written to {Path(rundir) / 'ensemble'}")

    _echo_errors(go)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--run", "rundir", required=True, type=click.Path(exists=True))
def evaluate(config_path, rundir):
    """Score forecasts and emit the skill reports, plot data and figures."""

    def go():
        cfg = _load(config_path, rundir)
        weighted = cfg.weights.mode != "off"
        _, _, _, test_design, sealed = pipeline.rebuild_state(cfg, weighted)
        outputs = _outputs_from_disk(rundir)
        variants, coeff_sets = pipeline.stage_ensemble(cfg, outputs, rundir)
        weighting = "ws_on" if weighted else "never"
        pipeline.stage_evaluate(cfg, outputs, variants, coeff_sets, test_design,
                                sealed, rundir, weighting)
        click.echo(f"evaluation written to {Path(rundir) / 'evaluate'}")

    _echo_errors(go)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--run", "rundir", required=True, type=click.Path(exists=True))
def importance(config_path, rundir):
    """Permutation predictor importance of the persisted forest."""

    def go():
        cfg = _load(config_path, rundir)
        weighted = cfg.weights.mode != "off"
        _, _, train_design, _, _ = pipeline.rebuild_state(cfg, weighted)
        models = pipeline.load_models(rundir)
        result = pipeline.stage_importance(cfg, models, train_design, rundir)
        top = np.argsort(result.importance)[::-1][:5]
        for i in top:
            click.echo(f"{result.names[i]}: {result.importance[i]:.4f}")

    _echo_errors(go)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None)
@click.option("--compare", is_flag=True, help="run never/ws_on and merge the grid")
def run(config_path, out, compare):
    """Full pipeline: data, weights, training, forecasts, evaluation."""

    def go():
        cfg = _load(config_path, out)
        if compare:
            cfg = dataclasses.replace(
                cfg, weights=dataclasses.replace(cfg.weights, mode="both")
            )
        rundir = pipeline.run_pipeline(cfg)
        click.echo(f"run complete: {rundir}")

    _echo_errors(go)


@main.command("prop-check")
@click.option("--instances", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--models", "n_models", type=int, default=3, show_default=True)
@click.option("--out", type=click.Path(), default=None)
def prop_check(instances, seed, n_models, out):
    """Random sweep of the ensemble skill-dominance inequality."""
    rng = np.random.default_rng(seed)
    violations = 0
    strict = 0
    positive = 0
    worst_margin = np.inf
    for _ in range(instances):
        n = int(rng.integers(4, 65))
        outputs = rng.uniform(0.01, 1.0, size=(n_models, n))
        y = rng.uniform(0.01, 1.0, size=n)
        a = rng.dirichlet(np.ones(n_models))
        rep = metrics.check_proposition1(list(outputs), y, a)
        if not rep.holds:
            violations += 1
        if rep.lhs > 1e-6:
            positive += 1
            if rep.strict:
                strict += 1
        if not rep.degenerate:
            worst_margin = min(worst_margin, rep.rhs - rep.lhs)
    summary = {
        "instances": instances,
        "violations": violations,
        "positive_lhs": positive,
        "strict_when_positive": strict,
        "worst_margin": worst_margin,
    }
    text = json.dumps(summary, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    click.echo(text)
    if violations:
        sys.exit(1)


if __name__ == "__main__":
    main()
