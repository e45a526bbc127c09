"""End-to-end analysis of one artifact: load, prune, explore, detect, report.

The wall-clock timeout is enforced per contract (functions within a contract
share the deadline), and a failing artifact never aborts a batch: errors are
captured in the report.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

from sleepscan import detectors
from sleepscan.astview import (
    FunctionInfo,
    find_owner_return_binding,
    function_infos,
    select_target_functions,
)
from sleepscan.disasm import build_cfg, disassemble
from sleepscan.errors import EntryNotFound, SleepscanError
from sleepscan.ingestion import CompilationUnit, load_all
from sleepscan.symexec import ExplorationBudget, explore_function

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    input_paths: list[str] = field(default_factory=list)
    timeout_seconds: int = 600
    loop_bound: int = 3
    max_steps: int = 100_000
    max_paths: int = 512
    solver_query_seconds: int = 10
    enabled_detectors: tuple[str, ...] = detectors.ALL_DEFECT_TYPES
    output_format: str = "text"
    prune: bool = True
    jobs: int = 1

    def __post_init__(self):
        for name in ("timeout_seconds", "loop_bound", "max_steps",
                     "max_paths", "solver_query_seconds", "jobs"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def analyze_unit(unit: CompilationUnit, config: RunConfig) -> dict:
    started = time.monotonic()
    deadline = started + config.timeout_seconds
    instrs = disassemble(unit.runtime_bytecode, unit.compiler_version)
    cfg = build_cfg(instrs)
    binding = find_owner_return_binding(unit)
    all_functions = function_infos(unit)
    externally_callable = [f for f in all_functions
                           if f.visibility in ("external", "public")]
    if config.prune:
        targets = select_target_functions(unit)
    else:
        targets = externally_callable

    records = []
    timed_out = False
    per_function: dict[str, float] = {}
    skipped: list[str] = []
    for fn in targets:
        fn_started = time.monotonic()
        budget = ExplorationBudget(
            max_steps=config.max_steps,
            max_paths=config.max_paths,
            loop_bound=config.loop_bound,
            deadline=deadline,
        )
        try:
            result = explore_function(unit, cfg, fn, binding, budget)
        except EntryNotFound:
            skipped.append(fn.name)
            continue
        records.extend(result.records)
        timed_out |= result.timed_out
        per_function[fn.name] = round(time.monotonic() - fn_started, 6)
        if time.monotonic() > deadline:
            timed_out = True
            break

    findings = detectors.analyze_contract(
        unit, records, config.enabled_detectors, config.solver_query_seconds)
    return {
        "schema_version": SCHEMA_VERSION,
        "contract": unit.contract_name,
        "compiler_version": ".".join(map(str, unit.compiler_version)),
        "functions_total": len(externally_callable),
        "functions_analyzed": len(per_function),
        "functions_skipped": skipped,
        "findings": [_finding_to_json(f) for f in findings],
        "path_records": _record_stats(records),
        "timings": {
            "total_seconds": round(time.monotonic() - started, 6),
            "per_function": per_function,
        },
        "timed_out": timed_out,
    }


def _finding_to_json(finding: detectors.Finding) -> dict:
    span = finding.src_span or (-1, 0, -1)
    return {
        "type": finding.defect_type,
        "function": finding.function,
        "file": span[2],
        "start": span[0],
        "length": span[1],
        "confidence": finding.confidence,
        "witness": list(finding.witness),
    }


def _record_stats(records) -> dict:
    stats: dict[str, int] = {}
    for rec in records:
        stats[rec.end_kind] = stats.get(rec.end_kind, 0) + 1
    return stats


def analyze_path(path: str, config: RunConfig) -> list[dict]:
    """All contract reports for one artifact path; errors become error reports."""
    reports = []
    try:
        units = load_all(path)
    except (SleepscanError, OSError, ValueError) as exc:
        return [{
            "schema_version": SCHEMA_VERSION,
            "contract": Path(path).stem,
            "error": f"{type(exc).__name__}: {exc}",
            "findings": [],
            "timed_out": False,
        }]
    for unit in units:
        try:
            reports.append(analyze_unit(unit, config))
        except (SleepscanError, OSError, ValueError) as exc:
            reports.append({
                "schema_version": SCHEMA_VERSION,
                "contract": unit.contract_name,
                "error": f"{type(exc).__name__}: {exc}",
                "findings": [],
                "timed_out": False,
            })
    return reports
