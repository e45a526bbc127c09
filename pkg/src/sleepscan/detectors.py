"""The four sleepminting defect rules, applied to completed path records.

Only clean transfer-emission records are analyzed; reverted or
budget-exhausted paths yield diagnostics, never findings. Records tainted by
unmodeled external calls still produce findings, downgraded to low
confidence so users can triage them the way a manual audit would.
"""

from __future__ import annotations

from dataclasses import dataclass

from sleepscan import constraints as con
from sleepscan.constraints import Constraint, ConstraintPattern
from sleepscan.ingestion import CompilationUnit
from sleepscan.symexec import END_EMISSION, PathRecord

PRIVILEGED_ADDRESS = "PrivilegedAddress"
UNRESTRICTED_FROM = "UnrestrictedFrom"
OWNER_INCONSISTENCY = "OwnerInconsistency"
EMPTY_TRANSFER_EVENT = "EmptyTransferEvent"

ALL_DEFECT_TYPES = (
    PRIVILEGED_ADDRESS,
    UNRESTRICTED_FROM,
    OWNER_INCONSISTENCY,
    EMPTY_TRANSFER_EVENT,
)

SHORT_CODES = {
    "PA": PRIVILEGED_ADDRESS,
    "UF": UNRESTRICTED_FROM,
    "OI": OWNER_INCONSISTENCY,
    "ETE": EMPTY_TRANSFER_EVENT,
}


@dataclass(frozen=True)
class Finding:
    defect_type: str
    contract: str
    function: str
    src_span: tuple[int, int, int] | None
    witness: tuple[str, ...]
    path_id: int
    confidence: str = "high"  # "low" when the path was tainted by external calls


def _eligible(rec: PathRecord) -> bool:
    return rec.end_kind == END_EMISSION


_CALLER_VS_DIRECT_ADDRESS = ConstraintPattern(
    relation=con.EQ,
    lhs_pred=con.is_caller,
    rhs_pred=con.is_storage_direct_address,
)


def detect_privileged_address(rec: PathRecord) -> Finding | None:
    """Caller compared for equality against a storage-direct address."""
    if not _eligible(rec):
        return None
    if not con.contains(rec.constraints, _CALLER_VS_DIRECT_ADDRESS):
        return None
    witness = tuple(
        repr(c) for c in rec.constraints
        if c.relation == con.EQ and (
            (con.is_caller(c.lhs) and con.is_storage_direct_address(c.rhs))
            or (con.is_caller(c.rhs) and con.is_storage_direct_address(c.lhs))
        )
    )
    return _finding(PRIVILEGED_ADDRESS, rec, witness)


def _owner_entries_all_equal(trace: tuple) -> bool:
    return all(entry == trace[0] for entry in trace[1:])


def detect_unrestricted_from(rec: PathRecord, solver_seconds: float = 10.0) -> Finding | None:
    """No ``owner == from`` guard on the path: pushing the negation stays sat."""
    if not _eligible(rec):
        return None
    if not rec.owner_trace or rec.from_param is None:
        return None
    if not _owner_entries_all_equal(rec.owner_trace):
        return None
    owner_latest = rec.owner_trace[-1]
    probe = Constraint(con.NEQ, owner_latest, rec.from_param)
    if con.solve(rec.constraints, (probe,), solver_seconds) != con.SAT:
        return None  # unsat: properly guarded; unknown: stay quiet
    return _finding(UNRESTRICTED_FROM, rec, (repr(probe),))


def detect_owner_inconsistency(rec: PathRecord, solver_seconds: float = 10.0) -> Finding | None:
    """Owner value changed mid-path, so the guard cannot cancel the negation."""
    if not _eligible(rec):
        return None
    if len(rec.owner_trace) < 2 or rec.from_param is None:
        return None
    if _owner_entries_all_equal(rec.owner_trace):
        return None
    owner_latest = rec.owner_trace[-1]
    probe = Constraint(con.NEQ, owner_latest, rec.from_param)
    if con.solve(rec.constraints, (probe,), solver_seconds) != con.SAT:
        return None
    witness = tuple(repr(entry) for entry in rec.owner_trace) + (repr(probe),)
    return _finding(OWNER_INCONSISTENCY, rec, witness)


def detect_empty_transfer_event(recs: list[PathRecord]) -> Finding | None:
    """Transfer emitted with no storage write anywhere on the whole function.

    An early emit followed by stores is exempt: the exit-time mark covers the
    code after the emission.
    """
    for rec in recs:
        if not _eligible(rec):
            continue
        if not rec.sstore_mark_at_emission and not rec.sstore_mark_at_exit:
            witness = (f"no SSTORE before emission at pc {rec.emission_pc} "
                       f"nor anywhere on the path",)
            return _finding(EMPTY_TRANSFER_EVENT, rec, witness)
    return None


def _finding(defect_type: str, rec: PathRecord, witness: tuple[str, ...]) -> Finding:
    return Finding(
        defect_type=defect_type,
        contract="",
        function=rec.function.name,
        src_span=rec.emission_src or rec.function.src_span,
        witness=witness,
        path_id=rec.path_id,
        confidence="low" if rec.tainted else "high",
    )


def analyze_contract(unit: CompilationUnit, records: list[PathRecord],
                     enabled: tuple[str, ...] = ALL_DEFECT_TYPES,
                     solver_seconds: float = 10.0) -> list[Finding]:
    """Run every enabled detector over all records, dedupe per (type, function)."""
    by_function: dict[str, list[PathRecord]] = {}
    for rec in records:
        by_function.setdefault(rec.function.name, []).append(rec)

    findings: list[Finding] = []
    for fn_name, recs in by_function.items():
        if EMPTY_TRANSFER_EVENT in enabled:
            found = detect_empty_transfer_event(recs)
            if found:
                findings.append(found)
        for rec in recs:
            if PRIVILEGED_ADDRESS in enabled:
                found = detect_privileged_address(rec)
                if found:
                    findings.append(found)
            if UNRESTRICTED_FROM in enabled:
                found = detect_unrestricted_from(rec, solver_seconds)
                if found:
                    findings.append(found)
            if OWNER_INCONSISTENCY in enabled:
                found = detect_owner_inconsistency(rec, solver_seconds)
                if found:
                    findings.append(found)

    deduped: dict[tuple[str, str], Finding] = {}
    for finding in findings:
        finding = Finding(
            defect_type=finding.defect_type,
            contract=unit.contract_name,
            function=finding.function,
            src_span=finding.src_span,
            witness=finding.witness,
            path_id=finding.path_id,
            confidence=finding.confidence,
        )
        key = (finding.defect_type, finding.function)
        previous = deduped.get(key)
        if previous is None or previous.confidence == "low" and finding.confidence == "high":
            deduped[key] = finding
    return sorted(deduped.values(),
                  key=lambda f: (f.src_span or (0, 0, 0), f.defect_type))
