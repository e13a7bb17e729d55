"""`plot-figs`: render sweep CSVs into one figure panel."""

from __future__ import annotations

import sys

import click

from . import __version__
from .render import FIGURE_IDS, NothingToPlotError, PlotSpec, SchemaError, render


@click.command()
@click.version_option(__version__)
@click.option("--csv", "csv_paths", multiple=True, required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Input CSV (repeatable).")
@click.option("--fig", "fig_id", required=True,
              type=click.Choice(list(FIGURE_IDS)))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--format", "image_format", type=click.Choice(["svg", "png"]),
              default=None, help="Defaults to the --out extension.")
def main(csv_paths, fig_id, out_path, image_format):
    """Render one figure panel from experiment CSV output."""
    if image_format is None:
        image_format = "png" if out_path.lower().endswith(".png") else "svg"
    try:
        spec = PlotSpec(csv_paths=tuple(csv_paths), fig_id=fig_id,
                        out_path=out_path, image_format=image_format)
        info = render(spec)
    except (SchemaError, NothingToPlotError, FileNotFoundError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"wrote {info.out_path} ({info.curve_count} curves)")


if __name__ == "__main__":
    sys.exit(main())
