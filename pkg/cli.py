# cli.py
from __future__ import annotations

import sys
from pathlib import Path
from typing import Optional

import click

from reporting import (
    a6_report,
    classify_report,
    horikawa_report,
    invariants_report,
    pg3_report,
    stratify_run,
    torsion_report,
)
from schemas import TupleFile
from utils.config import DEFAULT_LINES, DEFAULT_PRIME, DEFAULT_SAMPLES, DEFAULT_SEED, EXACT_GCD, WORKERS
from utils.errors import FibratoError, SchemaError
from utils.logs import get_logger

log = get_logger("cli")


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
        log.info("✅ wrote %s", output)
    else:
        click.echo(text, nl=not text.endswith("\n"))


def _read_tuple(path: str) -> TupleFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise SchemaError(f"cannot read {path}: {e!r}")
    return TupleFile.from_json(text)


def _run(fn, *args, **kwargs):
    """Call a report builder and map engine errors to exit codes."""
    try:
        return fn(*args, **kwargs)
    except FibratoError as e:
        click.echo(f"❌ {type(e).__name__}: {e}", err=True)
        sys.exit(e.exit_code)


# ========================================
# 🚀 COMMANDS
# ========================================
@click.group()
def main():
    """Structure data of genus-2 and genus-3 fibrations."""


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "-o", default=None, help="Write the report here instead of stdout.")
def invariants(file, output):
    """(chi, K^2), derived bundles and torsion degrees of a tuple file."""
    rep = _run(lambda: invariants_report(_read_tuple(file)))
    _emit(rep.to_json(), output)


@main.command()
@click.option("--pattern", default="none-zero", show_default=True, help="none-zero, f1=0, f2=f3=0, ...")
@click.option("--tau", default="general", show_default=True, help="[0], general, L1..L3 or M1..M8")
@click.option("--output", "-o", default=None)
def classify(pattern, tau, output):
    """Stratum of V2 and h^0(A6~) for p_g = q = 1, K^2 = 3."""
    rep = _run(classify_report, pattern, tau)
    _emit(rep.to_json(), output)


@main.command("pg3-example")
@click.option("--d", "d", type=int, required=True, help="deg tau, 0..3")
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--output", "-o", default=None)
def pg3_example_cmd(d, seed, output):
    """The p_g = 3 genus-3 family over P^1 with deg tau = d."""
    rep = _run(pg3_report, d, seed)
    _emit(rep.to_json(), output)


@main.command("stratify")
@click.option("--samples", type=int, default=DEFAULT_SAMPLES, show_default=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--prime", type=int, default=DEFAULT_PRIME, show_default=True)
@click.option("--lines", type=int, default=DEFAULT_LINES, show_default=True)
@click.option("--exact-gcd/--no-exact-gcd", default=EXACT_GCD, show_default=True)
@click.option("--workers", type=int, default=WORKERS, show_default=True)
@click.option("--output", "-o", default=None)
def stratify_cmd(samples, seed, prime, lines, exact_gcd, workers, output):
    """Rank stratification of F'(a,b,c,d) as TSV with a summary block."""
    rep = _run(stratify_run, samples, seed, prime, lines, exact_gcd, workers)
    _emit(rep.to_tsv(), output)


@main.command()
@click.option("--file", "file", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--pattern", default=None)
@click.option("--tau", default=None)
@click.option("--output", "-o", default=None)
def a6(file, pattern, tau, output):
    """Rank, degree and h^0 of A6~ from a tuple file or an elliptic pattern."""
    if file:
        rep = _run(lambda: a6_report(_read_tuple(file)))
    else:
        rep = _run(a6_report, None, pattern, tau)
    _emit(rep.to_json(), output)


@main.command()
@click.option("--n", "n", type=int, required=True)
@click.option("--deg-tau", type=int, required=True)
@click.option("--s", "s", type=int, multiple=True, help="Local multiplicities; repeat per point.")
@click.option("--lam", type=int, default=0, show_default=True)
@click.option("--output", "-o", default=None)
def torsion(n, deg_tau, s, lam, output):
    """Module structure of T_n, checked against the local Smith-form oracle."""
    rep = _run(torsion_report, n, deg_tau, list(s) or None, lam)
    _emit(rep.to_json(), output)


@main.command()
@click.option("--s", "s", type=int, required=True)
@click.option("--lambda-zero/--lambda-nonzero", default=False, show_default=True)
@click.option("--double-case", type=click.Choice(["i", "ii"]), default="i", show_default=True)
@click.option("--output", "-o", default=None)
def horikawa(s, lambda_zero, double_case, output):
    """Horikawa type and conic-bundle singularity over a point of tau."""
    rep = _run(horikawa_report, s, lambda_zero, double_case)
    _emit(rep.to_json(), output)


if __name__ == "__main__":
    main()
