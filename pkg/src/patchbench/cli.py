"""Command-line interface.

The pipeline is staged so each phase can be rerun independently:

    patchbench replay-pack --dest corpus/
    patchbench generate --config corpus/config.json --runs-dir runs/
    patchbench validate --run runs/<run-id>
    patchbench render --run runs/<run-id>
    patchbench report --run runs/<run-id>
    patchbench rate serve --run runs/<run-id> --port 8765
"""

from __future__ import annotations

import json
from pathlib import Path

import click

from . import harness, replay
from .harness import load_config


def _run_config(run_dir: Path) -> harness.RunConfig:
    config_path = Path(run_dir) / "config.json"
    if not config_path.exists():
        raise click.ClickException(f"{run_dir} has no config.json")
    return load_config(config_path)


@click.group()
def main() -> None:
    """Evaluate LLM-generated audio patches across representations."""


@main.command("replay-pack")
@click.option("--dest", type=click.Path(path_type=Path), required=True,
              help="Directory for the packed corpus (cache + config.json)")
def replay_pack(dest: Path) -> None:
    """Materialize the shipped deterministic replay corpus."""
    config = replay.build_replay_corpus(dest)
    cells = len(config.categories) * len(config.benchmarks)
    click.echo(f"packed {cells} cells x n={config.n} into {dest}")
    click.echo(f"run id: {config.run_id}")


@main.command()
@click.option("--config", "config_path", type=click.Path(path_type=Path), required=True)
@click.option("--runs-dir", type=click.Path(path_type=Path), default=Path("runs"))
@click.option("--run-id", default=None, help="Override the derived run id")
def generate(config_path: Path, runs_dir: Path, run_id: str | None) -> None:
    """Sample every (category x benchmark x index) cell."""
    try:
        config = load_config(config_path)
    except harness.ConfigError as err:
        raise click.ClickException(str(err))
    if run_id:
        config.run_id = run_id
    run_dir = runs_dir / config.run_id
    samples = harness.stage_generate(config, run_dir)
    click.echo(f"generated {len(samples)} samples into {run_dir}")


@main.command()
@click.option("--run", "run_dir", type=click.Path(path_type=Path), required=True)
def validate(run_dir: Path) -> None:
    """Check well-formedness and count nodes for every sample."""
    config = _run_config(run_dir)
    harness.stage_check(config, run_dir)
    samples = list(harness.iter_samples(run_dir, config))
    well_formed = sum(1 for s in samples if s.wellformed == "yes")
    click.echo(f"checked {len(samples)} samples: {well_formed} well-formed")


@main.command()
@click.option("--run", "run_dir", type=click.Path(path_type=Path), required=True)
def render(run_dir: Path) -> None:
    """Render well-formed samples to WAV and judge specific benchmarks."""
    config = _run_config(run_dir)
    harness.stage_render(config, run_dir)
    samples = list(harness.iter_samples(run_dir, config))
    judged = [s for s in samples if s.verdict is not None]
    passed = sum(1 for s in judged if s.verdict["status"] == "pass")
    human = sum(1 for s in judged if s.verdict["status"] == "needs-human")
    click.echo(f"rendered {len(judged)} samples: {passed} oracle-pass, {human} need humans")


@main.command()
@click.option("--run", "run_dir", type=click.Path(path_type=Path), required=True)
def report(run_dir: Path) -> None:
    """Fold sample records and ratings into report.{json,md,csv}."""
    config = _run_config(run_dir)
    result = harness.write_report(run_dir, config)
    click.echo(json.dumps(result.to_json()["categories"], indent=2))
    click.echo(f"report written under {run_dir}")


@main.group()
def rate() -> None:
    """Human rating workflows."""


@rate.command()
@click.option("--run", "run_dir", type=click.Path(path_type=Path), required=True)
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8765, type=int)
def serve(run_dir: Path, host: str, port: int) -> None:
    """Serve the review API for the rater UI."""
    from .review import serve_review

    _run_config(run_dir)  # fail fast on a bad run directory
    click.echo(f"review service for {run_dir} on http://{host}:{port}")
    serve_review(run_dir, host=host, port=port)


if __name__ == "__main__":
    main()
