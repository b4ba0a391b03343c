"""Command-line entry point: validate bundles, print summaries, export
static reports, and launch the API/UI server.

Exit codes: 0 success, 1 validation failure, 2 environment or I/O failure.
Logs go to stderr; data (reports, tables) goes to stdout.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click
import uvicorn

from . import analytics
from .analytics import HistogramSpec, SpecError
from .bundle import BundleError, load_bundle
from .model import Dataset, Outcome, validate_dataset
from .report import write_report
from .server import ServerState, create_app, default_static_dir


def _log(message: str) -> None:
    click.echo(message, err=True)


def _load_or_exit(bundle: str, normalize: bool | None, issues_to_stdout: bool = False) -> Dataset:
    try:
        return load_bundle(bundle, normalize=normalize)
    except BundleError as e:
        for issue in e.issues:
            click.echo(str(issue), err=not issues_to_stdout)
        sys.exit(1)
    except OSError as e:
        _log(f"error: {e}")
        sys.exit(2)


def _spec_from_flags(bins, lo, hi, groups, tn_min, tp_max) -> HistogramSpec:
    kwargs = {}
    if bins is not None:
        kwargs["bin_count"] = bins
    if lo is not None:
        kwargs["axis_lo"] = lo
    if hi is not None:
        kwargs["axis_hi"] = hi
    if tn_min is not None:
        kwargs["tn_min"] = tn_min
    if tp_max is not None:
        kwargs["tp_max"] = tp_max
    if groups is not None:
        names = {g.value: g for g in Outcome}
        parts = [p for p in groups.split(",") if p]
        unknown = [p for p in parts if p.lower() not in names]
        if unknown:
            raise click.UsageError(f"unknown outcome group(s): {', '.join(unknown)}")
        kwargs["groups"] = frozenset(names[p.lower()] for p in parts)
    try:
        return HistogramSpec(**kwargs)
    except SpecError as e:
        raise click.UsageError(str(e)) from None


def spec_options(f):
    for deco in reversed(
        [
            click.option("--bins", type=int, default=None, help="Number of histogram bins."),
            click.option("--lo", type=float, default=None, help="Lower score-axis bound."),
            click.option("--hi", type=float, default=None, help="Upper score-axis bound."),
            click.option("--groups", default=None, help="Comma list of outcome groups (tp,fp,fn,tn)."),
            click.option("--tn-min", type=float, default=None, help="Lower score bound for included TNs (> 0)."),
            click.option("--tp-max", type=float, default=None, help="Upper score bound for included TPs."),
        ]
    ):
        f = deco(f)
    return f


normalize_option = click.option(
    "--normalize/--no-normalize",
    "normalize",
    default=None,
    help="Force row normalization on or off (default: manifest flag).",
)


@click.group()
def main():
    """Inspect multi-class prediction scores: per-class outcome histograms,
    a linked confusion matrix, and what-if reweighting."""


@main.command()
@click.argument("bundle", type=click.Path())
@normalize_option
def validate(bundle, normalize):
    """Load BUNDLE, report every problem, exit 0 only when clean."""
    ds = _load_or_exit(bundle, normalize, issues_to_stdout=True)
    report = validate_dataset(ds)
    for w in report.warnings:
        click.echo(f"warning: {w}")
    f = len(ds.feature_names)
    click.echo(f"{ds.n} samples, {ds.k} classes, {f} feature{'' if f == 1 else 's'}")


@main.command()
@click.argument("bundle", type=click.Path())
@normalize_option
def summary(bundle, normalize):
    """Print BUNDLE's confusion matrix and per-class outcome counts."""
    ds = _load_or_exit(bundle, normalize)
    names = ds.class_names
    cm = analytics.confusion_matrix(ds)
    width = max(
        max(len(n) for n in names),
        max(len(str(v)) for row in cm.counts for v in row),
    )
    click.echo("Confusion matrix (rows: actual, columns: predicted)")
    click.echo(" ".join([" " * width, *(f"{n:>{width}}" for n in names)]))
    for name, row in zip(names, cm.counts):
        click.echo(" ".join([f"{name:>{width}}", *(f"{v:>{width}}" for v in row)]))
    click.echo("Per-class outcomes")
    for name, c in zip(names, analytics.per_class_counts(ds)):
        click.echo(f"{name}: TP={c.tp} FP={c.fp} FN={c.fn} TN={c.tn}")


@main.command()
@click.argument("bundle", type=click.Path())
@click.argument("out", type=click.Path())
@spec_options
@click.option("--members/--no-members", default=False, help="Include member sample ids in report.json.")
@click.option("--ui-dir", type=click.Path(), default=None, help="Built UI assets to bundle into the report.")
@normalize_option
def report(bundle, out, bins, lo, hi, groups, tn_min, tp_max, members, ui_dir, normalize):
    """Write a self-contained report of BUNDLE into directory OUT."""
    ds = _load_or_exit(bundle, normalize)
    spec = _spec_from_flags(bins, lo, hi, groups, tn_min, tp_max)
    ui = Path(ui_dir) if ui_dir else default_static_dir()
    try:
        written = write_report(ds, out, spec, ui_dir=ui, include_members=members)
    except OSError as e:
        _log(f"error: {e}")
        sys.exit(2)
    for path in written:
        _log(f"wrote {path}")


@main.command()
@click.argument("bundle", type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option(
    "--port",
    type=int,
    default=8000,
    envvar="CLASSILIST_PORT",
    show_default=True,
    help="Port to bind (env CLASSILIST_PORT).",
)
@click.option("--ui-dir", type=click.Path(), default=None, help="Directory of built UI assets to serve at /.")
@normalize_option
def serve(bundle, host, port, ui_dir, normalize):
    """Serve BUNDLE over the HTTP/JSON API with the UI at /."""
    ds = _load_or_exit(bundle, normalize)
    state = ServerState(ds)
    static = Path(ui_dir) if ui_dir else default_static_dir()
    app = create_app(state, static_dir=static)
    _log(f"serving {ds.n} samples, {ds.k} classes on http://{host}:{port}")
    server = uvicorn.Server(uvicorn.Config(app, host=host, port=port, log_level="info"))
    try:
        server.run()
    except KeyboardInterrupt:
        pass  # graceful shutdown already ran; exit clean
    except OSError as e:
        _log(f"error: cannot bind {host}:{port}: {e}")
        sys.exit(2)
    except SystemExit as e:
        # uvicorn reports startup failures (port in use, bad host) this way
        sys.exit(2 if e.code else 0)
    if not server.started:
        sys.exit(2)


if __name__ == "__main__":
    main()
