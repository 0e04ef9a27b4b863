"""Command-line entry points for the staged topic-modeling pipeline."""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click

from . import pipeline as pl
from .errors import InputFormatError, ProviderUnavailable, TopicforgeError
from .model import TopicModel

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_PROVIDER = 4

log = logging.getLogger(__name__)


def _load_config(path: str, seed: int | None) -> pl.PipelineConfig:
    try:
        config = pl.PipelineConfig.from_file(path)
    except InputFormatError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    if seed is not None:
        config.seed = seed
        config.provider.seed = seed
        config.umap.seed = seed
    return config


def _run_stages(config: pl.PipelineConfig, stages: tuple[str, ...] | None) -> None:
    try:
        status = pl.Pipeline(config).run(stages)
    except ProviderUnavailable as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_PROVIDER)
    except (TopicforgeError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_DATA)
    for stage, state in status.items():
        click.echo(f"{stage}: {state}")


def _config_options(fn):
    fn = click.option("--seed", type=int, default=None,
                      help="Override the config seed.")(fn)
    fn = click.option("-c", "--config", "config_path", required=True,
                      type=click.Path(exists=True, dir_okay=False),
                      help="Pipeline config JSON.")(fn)
    return fn


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Enable info logging.")
def main(verbose: bool) -> None:
    """Topic modeling for therapy-session transcripts."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


def _stage_command(name: str, stage: str, help_text: str) -> None:
    @main.command(name=name, help=help_text)
    @_config_options
    def cmd(config_path: str, seed: int | None) -> None:
        config = _load_config(config_path, seed)
        # run the stage plus its dependency chain; cached ones are skipped
        ordered = tuple(s for s in pl.STAGES
                        if s == stage or _upstream(stage, s))
        _run_stages(config, ordered)


def _upstream(stage: str, candidate: str) -> bool:
    deps = pl.STAGE_DEPS[stage]
    if candidate in deps:
        return True
    return any(_upstream(d, candidate) for d in deps)


_stage_command("preprocess", "documents",
               "Parse transcripts into cleaned sentence documents.")
_stage_command("embed", "embeddings", "Embed documents into vectors.")
_stage_command("reduce", "layout", "Project embeddings to a low-dim layout.")
_stage_command("cluster", "labeling", "Density-cluster the layout.")
_stage_command("represent", "topics", "Compute keywords per topic.")
_stage_command("label", "model", "Assemble the model with topic labels.")
_stage_command("evaluate", "coherence", "Score topic coherence.")
_stage_command("export-viz", "viz", "Write dendrogram/distance-map JSON.")


@main.command(name="run")
@_config_options
@click.option("--stage", "stages", multiple=True,
              type=click.Choice(pl.STAGES), help="Limit to specific stages.")
def run_cmd(config_path: str, seed: int | None, stages: tuple[str, ...]) -> None:
    """Run the full pipeline (or selected stages), reusing cached artifacts."""
    config = _load_config(config_path, seed)
    _run_stages(config, stages or None)


@main.command(name="compare")
@click.argument("model_a", type=click.Path(exists=True, dir_okay=False))
@click.argument("model_b", type=click.Path(exists=True, dir_okay=False))
@click.option("--band", default="0.9:1.0", show_default=True,
              help="Similarity band LO:HI for matching.")
@click.option("-o", "--output", type=click.Path(dir_okay=False),
              help="Also write the full match report as JSON.")
def compare_cmd(model_a: str, model_b: str, band: str, output: str | None) -> None:
    """Match topics between two saved models by centroid similarity."""
    try:
        lo, hi = (float(x) for x in band.split(":"))
    except ValueError:
        click.echo(f"error: bad band {band!r}, expected LO:HI", err=True)
        sys.exit(EXIT_CONFIG)
    if not (0.0 <= lo <= hi <= 1.0):
        click.echo(f"error: band {band!r} out of range", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        a = TopicModel.load(model_a)
        b = TopicModel.load(model_b)
        report = pl.compare_models(a, b, (lo, hi))
    except (TopicforgeError, OSError, ValueError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_DATA)
    if output:
        pl.write_match_report(report, output)
    click.echo(pl.format_match_table(report, a, b))


@main.command(name="serve")
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False),
              help="Saved model JSON (default: <output_dir>/model.json).")
@click.option("-c", "--config", "config_path",
              type=click.Path(exists=True, dir_okay=False),
              help="Pipeline config used to locate the model.")
@click.option("--port", default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--static", "static_dir", type=click.Path(file_okay=False),
              help="Directory with the built curation UI.")
@click.option("--compare", "compare_path", type=click.Path(dir_okay=False),
              help="Second model for the matches endpoint.")
def serve_cmd(model_path: str | None, config_path: str | None, port: int,
              host: str, static_dir: str | None, compare_path: str | None) -> None:
    """Serve the curation HTTP API (and optionally the UI)."""
    import uvicorn

    from .service import create_app

    if model_path is None:
        if config_path is None:
            click.echo("error: pass --model or -c/--config", err=True)
            sys.exit(EXIT_CONFIG)
        config = _load_config(config_path, None)
        model_path = str(Path(config.output_dir) / "model.json")
    if not Path(model_path).exists():
        click.echo(f"error: model file {model_path} not found", err=True)
        sys.exit(EXIT_DATA)
    if static_dir is None:
        bundled = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        static_dir = str(bundled) if bundled.is_dir() else None
    try:
        app = create_app(model_path, static_dir=static_dir,
                         compare_path=compare_path)
    except (TopicforgeError, ValueError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_DATA)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
