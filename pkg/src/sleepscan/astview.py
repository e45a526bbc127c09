"""AST-driven target-function pruning and ownerOf return-binding discovery.

Transfer emission propagates through same-unit internal calls: the canonical
``transferFrom`` emits only via an internal ``_transfer``, so without the
call-graph closure the very functions we care about would be pruned away.
Only the 3-argument ``Transfer(address,address,uint256)`` counts as the
ERC-721 event; overloads with other arities are ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from sleepscan.errors import NoAst
from sleepscan.ingestion import AstNode, CompilationUnit
from sleepscan.keccak import keccak256

Span = tuple[int, int, int]

EXTERNALLY_CALLABLE = ("external", "public")


@dataclass(frozen=True)
class FunctionInfo:
    name: str
    selector: int | None  # absent for internal/private functions
    params: tuple[tuple[str, str], ...]  # (name, canonical abi type)
    src_span: Span
    visibility: str
    emits_transfer: bool


@dataclass(frozen=True)
class ReturnBinding:
    function_name: str
    return_src_span: Span  # first return, in source order
    returned_identifier: str
    all_spans: tuple[Span, ...] = field(default_factory=tuple)


def compute_selector(signature: str, hash_oracle=keccak256) -> int:
    """First 4 bytes of keccak-256 over the canonical ASCII signature."""
    return int.from_bytes(hash_oracle(signature.encode("ascii"))[:4], "big")


_LOCATION_WORDS = re.compile(r"\b(calldata|memory|storage|payable)\b")
_ALIASES = {"uint": "uint256", "int": "int256", "byte": "bytes1"}


def canonical_type(type_string: str) -> str:
    cleaned = _LOCATION_WORDS.sub("", type_string or "").strip()
    cleaned = " ".join(cleaned.split())
    if cleaned.startswith("contract ") or cleaned == "address":
        return "address"
    base, _, suffix = cleaned.partition("[")
    base = _ALIASES.get(base, base)
    return base + ("[" + suffix if suffix else "")


def _function_definitions(ast: AstNode) -> list[AstNode]:
    return ast.find_all("FunctionDefinition")


def _parameters(fn: AstNode) -> tuple[tuple[str, str], ...]:
    plists = [c for c in fn.children if c.node_kind == "ParameterList"]
    params_node = None
    for node in plists:
        if node.get("_field") == "parameters":
            params_node = node
            break
    if params_node is None and plists:
        params_node = plists[0]
    if params_node is None:
        return ()
    out = []
    for decl in params_node.children:
        if decl.node_kind != "VariableDeclaration":
            continue
        out.append((decl.get("name", ""), canonical_type(decl.get("typeString", ""))))
    return tuple(out)


def _called_names(fn: AstNode) -> set[str]:
    names: set[str] = set()
    for call in fn.find_all("FunctionCall"):
        for child in call.children:
            if child.node_kind == "Identifier":
                names.add(child.get("name", ""))
                break
            if child.node_kind == "MemberAccess":
                names.add(child.get("memberName", ""))
                break
    return names


def _emits_transfer_directly(fn: AstNode) -> bool:
    for emit in fn.find_all("EmitStatement"):
        for call in emit.find_all("FunctionCall"):
            if not call.children:
                continue
            callee = call.children[0]
            event_name = callee.get("name") or callee.get("memberName")
            arg_count = len(call.children) - 1
            if event_name == "Transfer" and arg_count == 3:
                return True
    return False


def _transfer_closure(functions: list[AstNode]) -> dict[int, bool]:
    """Per-function emits_transfer, closed over same-unit calls by name."""
    by_name: dict[str, list[int]] = {}
    for idx, fn in enumerate(functions):
        by_name.setdefault(fn.get("name", ""), []).append(idx)
    direct = [_emits_transfer_directly(fn) for fn in functions]
    calls = [_called_names(fn) for fn in functions]
    emits = dict(enumerate(direct))
    changed = True
    while changed:
        changed = False
        for idx, fn in enumerate(functions):
            if emits[idx]:
                continue
            for callee_name in calls[idx]:
                if any(emits[j] for j in by_name.get(callee_name, ())):
                    emits[idx] = True
                    changed = True
                    break
    return emits


def function_infos(unit: CompilationUnit) -> list[FunctionInfo]:
    if unit.ast is None:
        raise NoAst(unit.contract_name)
    functions = _function_definitions(unit.ast)
    emits = _transfer_closure(functions)
    infos = []
    for idx, fn in enumerate(functions):
        name = fn.get("name", "")
        if not name:  # constructor / fallback / receive
            continue
        visibility = fn.get("visibility", "public")
        params = _parameters(fn)
        selector = None
        if visibility in EXTERNALLY_CALLABLE:
            signature = f"{name}({','.join(t for _, t in params)})"
            selector = compute_selector(signature)
        infos.append(FunctionInfo(
            name=name,
            selector=selector,
            params=params,
            src_span=fn.src_span,
            visibility=visibility,
            emits_transfer=emits[idx],
        ))
    return infos


def select_target_functions(unit: CompilationUnit) -> list[FunctionInfo]:
    """Externally callable functions whose bodies (transitively) emit Transfer."""
    return [
        info for info in function_infos(unit)
        if info.emits_transfer and info.visibility in EXTERNALLY_CALLABLE
    ]


def find_owner_return_binding(unit: CompilationUnit) -> ReturnBinding | None:
    """Span and identifier of ownerOf's return statement(s), if any.

    All return spans across every ``ownerOf`` definition (overrides included)
    are recorded so the engine can match whichever body actually executes.
    """
    if unit.ast is None:
        return None
    owner_fns = [fn for fn in _function_definitions(unit.ast) if fn.get("name") == "ownerOf"]
    if not owner_fns:
        return None
    spans: list[Span] = []
    first_identifier = None
    for fn in owner_fns:
        for ret in fn.find_all("Return"):
            spans.append(ret.src_span)
            if first_identifier is None:
                for node in ret.walk():
                    if node.node_kind == "Identifier":
                        first_identifier = node.get("name", "")
                        break
    if not spans:
        return None
    spans.sort(key=lambda s: (s[2], s[0]))
    return ReturnBinding(
        function_name="ownerOf",
        return_src_span=spans[0],
        returned_identifier=first_identifier or "",
        all_spans=tuple(spans),
    )
