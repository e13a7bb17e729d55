"""Command-line front end: sweeps, figure reproduction, validation
reports, and optimal-arrival-rate search."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__, experiments
from .dist import DistributionSpec, exponential


@click.group()
@click.version_option(__version__)
def main():
    """Age-of-information experiments for unreliable tandem queues."""


def _common(fn):
    fn = click.option("--seed", type=int, default=12345, show_default=True,
                      help="Base seed for all stochastic work.")(fn)
    fn = click.option("--jobs", type=int, default=1, show_default=True,
                      help="Worker processes.")(fn)
    return fn


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Sweep specification JSON.")
@click.option("--format", "fmt", type=click.Choice(["csv", "jsonl"]),
              default="csv", show_default=True)
@_common
def sweep(config_path, fmt, seed, jobs):
    """Evaluate a lambda/alpha grid and write a result table + manifest."""
    try:
        spec = experiments.SweepSpec.from_json(
            json.loads(Path(config_path).read_text())
        )
    except (ValueError, KeyError, TypeError) as exc:
        raise click.ClickException(f"invalid sweep config: {exc}") from exc
    manifest = experiments.sweep(spec, seed=seed, jobs=jobs, fmt=fmt)
    click.echo(f"wrote {spec.output_path} ({manifest['rows']} rows)")


@main.command()
@click.argument("fig_id", type=click.Choice(list(experiments.FIGURE_IDS)))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--format", "fmt", type=click.Choice(["csv", "jsonl"]),
              default="csv", show_default=True)
@_common
def reproduce(fig_id, out_dir, fmt, seed, jobs):
    """Write the canned CSV set behind one figure id."""
    paths = experiments.reproduce(fig_id, out_dir, seed=seed, jobs=jobs, fmt=fmt)
    for p in paths:
        click.echo(f"wrote {p}")


@main.command()
@click.option("--suite", default="default", show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@_common
def validate(suite, out_dir, seed, jobs):
    """Run the validation matrix; failures are report content."""
    try:
        report = experiments.validate(suite, out_dir=out_dir, seed=seed, jobs=jobs)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(experiments.render_report_text(report), nl=False)
    click.echo(f"report written to {out_dir}")


@main.command("lambda-star")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON: model, n_nodes, stage, alpha, gamma, engine, "
                   "bracket, optional repair/horizon/replications.")
@_common
def lambda_star(config_path, seed, jobs):
    """Locate the arrival rate minimizing the average age."""
    cfg = json.loads(Path(config_path).read_text())
    try:
        stage = DistributionSpec.from_json(cfg["stage"])
        repair = (DistributionSpec.from_json(cfg["repair"])
                  if cfg.get("repair") else exponential(cfg["gamma"]))
        engine = cfg.get("engine", "analytic")
        if engine == "analytic":
            fn = experiments.analytic_aaoi_fn(
                cfg["model"], cfg["n_nodes"], stage, cfg["alpha"],
                cfg["gamma"], repair,
            )
        elif engine == "simulation":
            fn = experiments.simulation_aaoi_fn(
                cfg["model"], cfg["n_nodes"], stage, cfg["alpha"],
                cfg["gamma"], base_seed=seed,
                horizon=cfg.get("horizon", 2e5),
                replications=cfg.get("replications", 8),
                repair=repair, jobs=jobs,
            )
        else:
            raise click.ClickException(f"unknown engine {engine!r}")
        bracket = tuple(cfg["bracket"])
    except (KeyError, TypeError, ValueError) as exc:
        raise click.ClickException(f"invalid lambda-star config: {exc}") from exc
    try:
        lam, val = experiments.find_lambda_star(fn, bracket)
    except experiments.NoInteriorMinimumError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(json.dumps(
        {"lambda_star": lam, "aaoi_min": val, "engine": engine}
    ))


if __name__ == "__main__":
    sys.exit(main())
