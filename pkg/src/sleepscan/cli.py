"""Command-line front end."""

from __future__ import annotations

import concurrent.futures
import json
import sys
from pathlib import Path

import click

from sleepscan import evaluate as evaluate_mod
from sleepscan import pipeline
from sleepscan.detectors import ALL_DEFECT_TYPES, SHORT_CODES
from sleepscan.disasm import disassemble, dump_listing
from sleepscan.ingestion import load_all


@click.group()
def main():
    """Sleepminting defect scanner for ERC-721 contract artifacts."""


def _parse_only(value: str | None) -> tuple[str, ...]:
    if not value:
        return ALL_DEFECT_TYPES
    enabled = []
    for code in value.split(","):
        code = code.strip()
        defect_type = SHORT_CODES.get(code.upper(), code)
        if defect_type not in ALL_DEFECT_TYPES:
            raise click.BadParameter(f"unknown detector {code!r}; "
                                     f"use {','.join(SHORT_CODES)}")
        enabled.append(defect_type)
    return tuple(enabled)


@main.command()
@click.argument("paths", nargs=-1, type=click.Path(exists=True))
@click.option("--timeout", default=600, show_default=True,
              help="Wall-clock seconds per contract.")
@click.option("--loop-bound", default=3, show_default=True,
              help="Max visits per JUMPDEST on one path.")
@click.option("--max-steps", default=100_000, show_default=True,
              help="Symbolic step budget per function.")
@click.option("--max-paths", default=512, show_default=True,
              help="Path budget per function.")
@click.option("--solver-seconds", default=10, show_default=True,
              help="Per-query solver time limit.")
@click.option("--format", "output_format", type=click.Choice(["text", "json"]),
              default="text", show_default=True)
@click.option("--only", default=None,
              help="Comma-separated detectors: PA,UF,OI,ETE.")
@click.option("--out", default=None, type=click.Path(),
              help="Write the JSON report list to FILE.")
@click.option("--no-prune", is_flag=True,
              help="Debug: analyze every external function, not only "
                   "Transfer-emitting ones.")
@click.option("--jobs", default=1, show_default=True,
              help="Parallel worker processes for batch runs.")
def analyze(paths, timeout, loop_bound, max_steps, max_paths, solver_seconds,
            output_format, only, out, no_prune, jobs):
    """Analyze contract artifacts (standard-JSON files or artifact dirs)."""
    if not paths:
        raise click.UsageError("no input paths given")
    config = pipeline.RunConfig(
        input_paths=list(paths),
        timeout_seconds=timeout,
        loop_bound=loop_bound,
        max_steps=max_steps,
        max_paths=max_paths,
        solver_query_seconds=solver_seconds,
        enabled_detectors=_parse_only(only),
        output_format=output_format,
        prune=not no_prune,
        jobs=jobs,
    )
    reports: list[dict] = []
    if jobs > 1 and len(paths) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            for chunk in pool.map(pipeline.analyze_path, paths,
                                  [config] * len(paths)):
                reports.extend(chunk)
    else:
        for path in paths:
            reports.extend(pipeline.analyze_path(path, config))

    if out:
        Path(out).write_text(json.dumps(reports, indent=2))
    if output_format == "json":
        click.echo(json.dumps(reports, indent=2))
    else:
        for report in reports:
            _print_text_report(report)
    if any("error" in r for r in reports) and len(reports) == sum(
            1 for r in reports if "error" in r):
        sys.exit(1)  # every artifact failed: a tool error, not a clean run


def _print_text_report(report: dict) -> None:
    name = report.get("contract", "?")
    if "error" in report:
        click.echo(f"{name}: ERROR {report['error']}")
        return
    timeout_note = " (timed out)" if report.get("timed_out") else ""
    click.echo(
        f"{name}: {report['functions_analyzed']}/{report['functions_total']} "
        f"functions analyzed in {report['timings']['total_seconds']:.2f}s"
        f"{timeout_note}"
    )
    for finding in report["findings"]:
        click.echo(
            f"  [{finding['confidence']}] {finding['type']} in "
            f"{finding['function']} (file {finding['file']}, "
            f"chars {finding['start']}..{finding['start'] + finding['length']})"
        )
    if not report["findings"]:
        click.echo("  no findings")


@main.command()
@click.option("--labels", required=True, type=click.Path(exists=True),
              help="JSON list of corpus labels.")
@click.option("--reports", "reports_dir", required=True,
              type=click.Path(exists=True),
              help="Directory of per-contract report JSON files.")
def evaluate(labels, reports_dir):
    """Score reports against hand labels (per-type precision)."""
    label_list = evaluate_mod.load_labels(labels)
    report_list = evaluate_mod.load_reports(reports_dir)
    result = evaluate_mod.evaluate_corpus(label_list, report_list)
    for defect_type, score in result["per_type"].items():
        precision = score["precision"]
        text = f"{precision:.1f}%" if precision is not None else "n/a"
        click.echo(f"{defect_type}: TP={score['TP']} FP={score['FP']} "
                   f"FN={score['FN']} precision={text}")
    overall = result["overall"]
    text = f"{overall['precision']:.1f}%" if overall["precision"] is not None else "n/a"
    click.echo(f"overall: TP={overall['TP']} of {overall['total']} precision={text}")


@main.command()
@click.argument("path", type=click.Path(exists=True))
def disasm(path):
    """Debug: dump the instruction listing with source snippets."""
    for unit in load_all(path):
        click.echo(f"=== {unit.contract_name} ===")
        instrs = disassemble(unit.runtime_bytecode, unit.compiler_version)
        click.echo(dump_listing(instrs, unit.source_map, unit.sources))


if __name__ == "__main__":
    main()
