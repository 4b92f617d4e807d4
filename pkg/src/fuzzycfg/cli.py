"""Batch front-end: validate models, run configurations, launch the service.

Exit codes: 0 ok, 1 validation violations, 2 parse failure, 3 engine error.
"""

from __future__ import annotations

import sys
from dataclasses import replace
from pathlib import Path

import click

from .modelio import ModelParseError, parse_model, render_result
from .pipeline import ModelValidationError, run_configuration

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PARSE = 2
EXIT_ENGINE = 3


def _load(path: str, validate: bool = True):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        click.echo(f"cannot read {path}: {exc}", err=True)
        sys.exit(EXIT_PARSE)
    try:
        return parse_model(text, validate=validate)
    except ModelParseError as exc:
        for issue in exc.issues:
            click.echo(str(issue), err=True)
        sys.exit(EXIT_PARSE)


@click.group()
def main() -> None:
    """Fuzzy agent-based product configuration."""


@main.command()
@click.argument("model_path", type=click.Path())
@click.option("--alpha", type=float, default=None, help="cohesion/separation blend in [0,1]")
@click.option("--epsilon", type=float, default=None, help="rating tie window for expansion")
@click.option("--generalized/--elementary", default=None, help="pre-cluster communities into super-agents")
@click.option("--max-sweeps", type=int, default=None)
@click.option("--score", type=click.Choice(["mean", "min"]), default=None)
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table")
@click.option("--seed-order", default=None, help="comma-separated explicit sweep order")
def run(model_path, alpha, epsilon, generalized, max_sweeps, score, fmt, seed_order):
    """Run the configuration pipeline on a model file."""
    model = _load(model_path)
    overrides = {}
    if alpha is not None:
        overrides["alpha"] = alpha
    if epsilon is not None:
        overrides["epsilon"] = epsilon
    if generalized is not None:
        overrides["generalized"] = generalized
    if max_sweeps is not None:
        overrides["max_sweeps"] = max_sweeps
    if score is not None:
        overrides["score"] = score
    if seed_order is not None:
        overrides["sweep_order"] = tuple(seed_order.split(","))
    if overrides:
        model = replace(model, options=replace(model.options, **overrides))
    try:
        result = run_configuration(model)
    except ModelValidationError as exc:
        for problem in exc.problems:
            click.echo(problem, err=True)
        sys.exit(EXIT_INVALID)
    except Exception as exc:  # engine failure, not a validation issue
        click.echo(f"engine error: {exc}", err=True)
        sys.exit(EXIT_ENGINE)
    click.echo(
        render_result(result, "structured" if fmt == "json" else "table"), nl=False
    )


@main.command()
@click.argument("model_path", type=click.Path())
def validate(model_path):
    """Check a model file; exit 0 only if it is clean."""
    from .pipeline import validate_model

    model = _load(model_path, validate=False)
    problems = validate_model(model)
    if problems:
        for problem in problems:
            click.echo(problem)
        sys.exit(EXIT_INVALID)
    click.echo("ok")


@main.command()
@click.option("--port", type=int, default=8000)
@click.option("--host", default="127.0.0.1")
@click.option("--log-dir", type=click.Path(), default=None, help="append-only update logs per session")
def serve(port, host, log_dir):
    """Start the interactive HTTP service."""
    import uvicorn

    from .service import SessionStore, create_app

    store = SessionStore(Path(log_dir) if log_dir else None)
    uvicorn.run(create_app(store), host=host, port=port)


if __name__ == "__main__":
    main()
