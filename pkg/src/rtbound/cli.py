"""Command-line front end: ``rtbound analyze | eval | corpus``."""

from __future__ import annotations

import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import click

from . import __version__
from .analyzer import THRESHOLD_RULES, AnalysisResult, analyze
from .corpus import DEFAULT_EPSILONS, data_text, reproduce
from .errors import RecError
from .evalcore import DEFAULT_CAP, eval_bi_row, eval_uni
from .numeric import Constants, Interval, format_rational
from .recdsl import BiRecurrence, parse
from .shapes import BoundShape

EXIT_YES, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


def report_schema() -> dict:
    return json.loads(data_text("report.schema.json"))


def _s(value) -> str | None:
    return None if value is None else str(value)


def build_report(result: AnalysisResult, mode: str, source: str, elapsed_ms: float) -> dict:
    return {
        "verdict": result.verdict,
        "shape": result.shape_label,
        "mode": mode,
        "epsilon": None if result.epsilon is None else format_rational(result.epsilon),
        "d": _s(result.d),
        "N": result.threshold_N,
        "d_prefix": _s(result.prefix_max),
        "d_threshold": _s(result.threshold_d),
        "base_cost": str(result.base_cost),
        "bound": result.bound_text() or None,
        "p": None if result.p is None else result.p.to_json(),
        "q": None if result.q is None else result.q.to_json(),
        "multiplier": None if result.multiplier is None else list(result.multiplier),
        "time_ms": round(elapsed_ms, 3),
        "input": source,
        "version": __version__,
        "diagnostics": list(result.diagnostics),
    }


def _text_report(report: dict) -> str:
    lines = [f"verdict: {report['verdict']}", f"shape: {report['shape']}"]
    for key in ("epsilon", "N", "d", "d_prefix", "d_threshold", "bound"):
        if report[key] is not None:
            lines.append(f"{key}: {report[key]}")
    for key in ("p", "q"):
        if report[key] is not None:
            lines.append(f"{key}: log={report[key]['log']} plain={report[key]['plain']}")
    if report["multiplier"] is not None:
        lines.append(f"multiplier: n^{report['multiplier'][0]} (n-1)^{report['multiplier'][1]}")
    lines.extend(f"note: {d}" for d in report["diagnostics"])
    lines.append(f"time_ms: {report['time_ms']}")
    return "\n".join(lines)


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_ERROR)


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        _fail(str(exc))


@click.group()
@click.version_option(__version__, prog_name="rtbound")
def main() -> None:
    """Expected-runtime bounds for randomized recurrence relations."""


@main.command("analyze")
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("--bound", "bound", default="auto", type=click.Choice(["logn", "n", "nlogn", "auto"]),
              show_default=True, help="Bound shape to try; auto tries ln n, n, n ln n in turn.")
@click.option("--mode", default="synth", type=click.Choice(["decide", "synth"]), show_default=True)
@click.option("--epsilon", default="0.01", show_default=True, help="Synthesis tolerance in (0, 1).")
@click.option("--rule", default="reference", type=click.Choice(THRESHOLD_RULES), show_default=True,
              help="How the threshold N treats values equal to epsilon.")
@click.option("--constants", "constants", default="tight", type=click.Choice(["tight", "four-digit"]),
              show_default=True, help="Enclosures used for ln 2 and e.")
@click.option("--cap", default=DEFAULT_CAP, show_default=True, help="Largest N searched.")
@click.option("--json", "as_json", is_flag=True, help="Emit a JSON report.")
def analyze_cmd(file, bound, mode, epsilon, rule, constants, cap, as_json):
    """Decide or synthesize a bound for the relation in FILE."""
    source = _read(file)
    start = time.perf_counter()
    try:
        rec = parse(source)
        shape = None if bound == "auto" else BoundShape.parse(bound)
        eps = Fraction(epsilon) if mode == "synth" else None
        result = analyze(rec, shape, mode, eps, Constants.named(constants), cap, rule)
    except (RecError, ValueError, ZeroDivisionError) as exc:
        _fail(str(exc))
    report = build_report(result, mode, source, (time.perf_counter() - start) * 1000)
    click.echo(json.dumps(report, indent=2) if as_json else _text_report(report))
    sys.exit(EXIT_YES if result.ok else EXIT_FAIL)


def _cell(value) -> str:
    if isinstance(value, Interval):
        return f"[{float(value.lo):.12g},{float(value.hi):.12g}]"
    return format_rational(value)


def _cell_json(value):
    if isinstance(value, Interval):
        return {"lo": str(value.lo), "hi": str(value.hi), "approx": float((value.lo + value.hi) / 2)}
    return format_rational(value)


@main.command("eval")
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("--upto", required=True, type=int, help="Evaluate T(1..upto).")
@click.option("--n", "n", type=int, default=None, help="First argument for a two-variable relation.")
@click.option("--cap", default=DEFAULT_CAP, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def eval_cmd(file, upto, n, cap, as_json):
    """Print the evaluation sequence of the relation in FILE."""
    source = _read(file)
    try:
        rec = parse(source)
        if isinstance(rec, BiRecurrence):
            if n is None:
                raise ValueError("two-variable relation: pass --n")
            table = eval_bi_row(rec, n, upto, cap=cap)
        else:
            if n is not None:
                raise ValueError("--n applies only to two-variable relations")
            table = eval_uni(rec, upto, cap=cap)
    except (RecError, ValueError) as exc:
        _fail(str(exc))
    values = table.values
    if as_json:
        click.echo(json.dumps({"n": n, "values": [_cell_json(v) for v in values], "exact": table.exact}, indent=2))
    else:
        for i, v in enumerate(values, start=1):
            click.echo(f"{i}\t{_cell(v)}")


@main.command("corpus")
@click.option("--epsilons", default=",".join(DEFAULT_EPSILONS), show_default=True,
              help="Comma-separated epsilons.")
@click.option("--fixtures", "fixture_path", type=click.Path(dir_okay=False), default=None,
              help="JSON file overriding expected values, keyed by entry id.")
@click.option("--rule", default="reference", type=click.Choice(THRESHOLD_RULES), show_default=True)
@click.option("--constants", "constants", default="tight", type=click.Choice(["tight", "four-digit"]),
              show_default=True)
@click.option("--frozen-sort-sel", is_flag=True,
              help="Use the shipped Sort-Sel slope 8.091 at every epsilon.")
@click.option("--json", "as_json", is_flag=True)
def corpus_cmd(epsilons, fixture_path, rule, constants, frozen_sort_sel, as_json):
    """Re-run the built-in benchmarks and compare with the expected results."""
    overrides = None
    if fixture_path:
        try:
            overrides = json.loads(Path(fixture_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            _fail(str(exc))
    try:
        eps_list = [e.strip() for e in epsilons.split(",") if e.strip()]
        start = time.perf_counter()
        run = reproduce(eps_list, fixture_overrides=overrides, constants=Constants.named(constants),
                        rule=rule, chain_sort_sel=not frozen_sort_sel)
        elapsed = (time.perf_counter() - start) * 1000
    except (RecError, ValueError) as exc:
        _fail(str(exc))
    if as_json:
        payload = {
            "ok": run.ok,
            "epsilons": eps_list,
            "time_ms": round(elapsed, 3),
            "version": __version__,
            "cells": [c.to_json() for c in run.cells],
        }
        click.echo(json.dumps(payload, indent=2))
    else:
        for c in run.cells:
            mark = "ok  " if c.ok else "FAIL"
            extra = f"  ({c.note})" if c.note else ""
            click.echo(f"{mark} {c.entry:<9} {c.kind:<8} {c.key:<6} expected {c.expected:<8} got {c.actual}{extra}")
        bad = run.failures()
        click.echo(f"{len(run.cells) - len(bad)}/{len(run.cells)} cells within tolerance; {elapsed:.0f} ms")
    sys.exit(EXIT_YES if run.ok else EXIT_ERROR)


if __name__ == "__main__":
    main()
