"""Command-line driver: ``solitonlab check | volume | catalog``."""

from __future__ import annotations

import json
import math
import sys

import click

from . import catalog, integrate as ig, suites
from .errors import NonCompactManifold, SolitonLabError
from .report import DISCREPANT, FAIL, PASS, SKIPPED

ALL_BUILTINS = "builtin:all"


def _fmt(x):
    return "nan" if x is None or not math.isfinite(x) else f"{x:.3e}"


def _record(rep, manifold=None):
    r = rep.max_residual
    rec = {
        "id": rep.check_id,
        "anchor": rep.anchor,
        "n_points": rep.n_points,
        "max_residual": None if not math.isfinite(r) else float(r),
        "verdict": rep.verdict,
    }
    if manifold is not None:
        rec["manifold"] = manifold
    return rec


def _text_line(rep, manifold=None):
    prefix = f"{manifold}  " if manifold else ""
    line = f"{prefix}{rep.check_id:<32s} {rep.verdict:<10s} {_fmt(rep.max_residual):>10s}  [{rep.anchor}]"
    if rep.verdict in (FAIL, DISCREPANT, SKIPPED) and rep.diagnostics:
        line += "\n" + "\n".join(f"    {d}" for d in rep.diagnostics)
    return line


def _resolve_many(ref):
    if ref == ALL_BUILTINS:
        return [catalog.builtin(n) for n in catalog.names()]
    return [catalog.resolve(ref)]


def _fail_input(exc):
    click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
    sys.exit(2)


@click.group()
def main():
    """Numerical verification of statistical structures and gradient solitons."""


@main.command()
@click.argument("manifold_arg", required=False, metavar="[MANIFOLD]")
@click.option("--manifold", "manifold_opt", help="Path, spec text, builtin:NAME or builtin:all.")
@click.option("--suite", type=click.Choice(suites.SUITES + ("all",)), default="all", show_default=True)
@click.option("--points", type=click.IntRange(min=1), default=50, show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--tol", type=click.FloatRange(min=0, min_open=True), default=1e-9, show_default=True)
@click.option("--grid", type=int, default=64, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["text", "structured"]), default="text", show_default=True)
def check(manifold_arg, manifold_opt, suite, points, seed, tol, grid, fmt):
    """Run a check suite and print one line per check."""
    ref = manifold_opt or manifold_arg
    if ref is None:
        raise click.UsageError("a manifold is required (argument or --manifold)")
    if manifold_opt and manifold_arg and manifold_opt != manifold_arg:
        raise click.UsageError("give the manifold once")
    try:
        cfg = suites.SuiteConfig(suite, points, seed, tol, grid, fmt)
        specs = _resolve_many(ref)
    except (SolitonLabError, ValueError, OSError) as exc:
        _fail_input(exc)
    multi = len(specs) > 1
    counts = {PASS: 0, FAIL: 0, DISCREPANT: 0, SKIPPED: 0}
    lines = []
    for spec in specs:
        try:
            reports = suites.run(spec, cfg)
        except SolitonLabError as exc:
            _fail_input(exc)
        tag = spec.name if multi else None
        for rep in reports:
            counts[rep.verdict] += 1
            if fmt == "structured":
                lines.append(json.dumps(_record(rep, tag)))
            else:
                lines.append(_text_line(rep, tag))
    click.echo("\n".join(lines))
    summary = ", ".join(f"{k}={v}" for k, v in counts.items())
    if fmt == "structured":
        click.echo(json.dumps({"summary": counts}))
    else:
        click.echo(f"summary: {summary}")
    sys.exit(1 if counts[FAIL] else 0)


@main.command()
@click.argument("manifold_arg", required=False, metavar="[MANIFOLD]")
@click.option("--manifold", "manifold_opt")
@click.option("--formula", type=click.Choice(ig.FORMULAS + ("all",)), default="all", show_default=True)
@click.option("--grid", type=int, default=64, show_default=True)
@click.option("--tol", type=click.FloatRange(min=0, min_open=True), default=1e-6, show_default=True)
def volume(manifold_arg, manifold_opt, formula, grid, tol):
    """Compare vol(M) with the volume formulas on a compact chart."""
    ref = manifold_opt or manifold_arg
    if ref is None:
        raise click.UsageError("a manifold is required (argument or --manifold)")
    try:
        spec = catalog.resolve(ref)
        if not spec.compact:
            raise NonCompactManifold(f"{spec.name} is not compact (not every coordinate is periodic)")
        g = spec.grid(grid)
    except (SolitonLabError, ValueError) as exc:
        _fail_input(exc)
    lam_fn = spec.lambda_jet if spec.lam is not None else None
    failed = False
    for which in ig.FORMULAS if formula == "all" else (formula,):
        try:
            rep = suites.volume_check(spec, which, g, lam_fn, tol)
        except suites.PRECONDITION_ERRORS as exc:
            click.echo(f"{which:<18s} SKIPPED  ({type(exc).__name__}: {exc})")
            continue
        d = rep.data
        label = "integral" if which == "zero_remark" else "rhs"
        click.echo(f"{which:<18s} {rep.verdict:<8s} vol={d['vol']:.12g} {label}={d['rhs']:.12g} residual={_fmt(rep.max_residual)}")
        failed |= rep.verdict == FAIL
    sys.exit(1 if failed else 0)


@main.group(name="catalog")
def catalog_cmd():
    """Inspect the built-in manifolds."""


@catalog_cmd.command(name="list")
def catalog_list():
    for name in catalog.names():
        click.echo(name)


@catalog_cmd.command(name="show")
@click.argument("name")
def catalog_show(name):
    try:
        click.echo(catalog.dumps(catalog.resolve(name)))
    except SolitonLabError as exc:
        _fail_input(exc)


if __name__ == "__main__":
    main()
