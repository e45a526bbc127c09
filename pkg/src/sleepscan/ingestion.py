"""Loading and normalizing compiler artifacts into a CompilationUnit.

Two input layouts are accepted:
  A. a Solidity-compiler standard-JSON output file, and
  B. a directory with ``<name>.bin-runtime``, ``<name>.srcmap-runtime``,
     ``<name>.ast.json`` and ``<name>.sol``.

The deployed (runtime) bytecode and its source map are used throughout; the
defect-bearing functions live in runtime code, not the constructor.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from sleepscan.disasm import count_instructions
from sleepscan.errors import (
    MalformedItem,
    MapLengthMismatch,
    MissingArtifact,
    VersionUnparseable,
)

Version = tuple[int, int, int]

JUMP_INTO = "i"
JUMP_OUT = "o"
JUMP_REGULAR = "-"


@dataclass(frozen=True)
class SourceMapEntry:
    start: int
    length: int
    file: int  # -1 for compiler-generated code
    jump_kind: str  # "i" | "o" | "-"

    def contains(self, other: "SourceMapEntry | tuple[int, int, int]") -> bool:
        if isinstance(other, SourceMapEntry):
            o_start, o_len, o_file = other.start, other.length, other.file
        else:
            o_start, o_len, o_file = other
        return (
            self.file == o_file
            and self.start >= o_start
            and self.start + self.length <= o_start + o_len
        )


@dataclass
class AstNode:
    node_kind: str
    src_span: tuple[int, int, int]  # (start, length, file)
    children: list["AstNode"] = field(default_factory=list)
    attributes: dict = field(default_factory=dict)

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()

    def find_all(self, kind: str):
        return [n for n in self.walk() if n.node_kind == kind]

    def get(self, key, default=None):
        return self.attributes.get(key, default)


@dataclass
class CompilationUnit:
    contract_name: str
    runtime_bytecode: bytes
    source_map: list[SourceMapEntry]
    ast: AstNode
    sources: list[tuple[int, str]]
    compiler_version: Version

    def source_text(self, file_id: int) -> str | None:
        for fid, text in self.sources:
            if fid == file_id:
                return text
        return None

    def snippet(self, span: tuple[int, int, int]) -> str:
        text = self.source_text(span[2])
        if text is None:
            return ""
        return text[span[0]:span[0] + span[1]]


# --------------------------------------------------------------------------
# source map codec

def decode_source_map(encoded: str) -> list[SourceMapEntry]:
    """Decode the compiler's delta-compressed ``s:l:f:j`` source map."""
    if encoded == "":
        return []
    entries: list[SourceMapEntry] = []
    prev = [0, 0, -1, JUMP_REGULAR]
    for item in encoded.split(";"):
        fields = item.split(":")
        values = list(prev)
        for i in range(min(len(fields), 4)):
            raw = fields[i]
            if raw == "":
                continue
            if i == 3:
                values[i] = raw
            else:
                try:
                    values[i] = int(raw)
                except ValueError as exc:
                    raise MalformedItem(f"non-integer field {raw!r} in item {item!r}") from exc
        entries.append(SourceMapEntry(values[0], values[1], values[2], values[3]))
        prev = values
    return entries


def encode_source_map(entries: list[SourceMapEntry]) -> str:
    """Re-encode entries under the same delta/inheritance rules."""
    items: list[str] = []
    prev: SourceMapEntry | None = None
    for entry in entries:
        fields = [str(entry.start), str(entry.length), str(entry.file), entry.jump_kind]
        if prev is not None:
            if entry.jump_kind == prev.jump_kind:
                fields[3] = ""
            if entry.file == prev.file:
                fields[2] = ""
            if entry.length == prev.length:
                fields[1] = ""
            if entry.start == prev.start:
                fields[0] = ""
        while fields and fields[-1] == "":
            fields.pop()
        items.append(":".join(fields))
        prev = entry
    return ";".join(items)


# --------------------------------------------------------------------------
# metadata trailer

def strip_metadata(bytecode: bytes) -> bytes:
    """Drop the CBOR metadata trailer the compiler appends to runtime code.

    Best-effort: the input is returned unchanged whenever the trailing two
    bytes do not describe a well-formed CBOR map of the right length.
    """
    if len(bytecode) < 2:
        return bytecode
    trailer_len = int.from_bytes(bytecode[-2:], "big")
    if trailer_len == 0 or trailer_len + 2 > len(bytecode):
        return bytecode
    trailer = bytecode[-(trailer_len + 2):-2]
    if _is_cbor_map(trailer):
        return bytecode[:-(trailer_len + 2)]
    return bytecode


def _is_cbor_map(data: bytes) -> bool:
    try:
        end = _cbor_item_end(data, 0)
    except (ValueError, IndexError):
        return False
    return end == len(data) and data and (data[0] >> 5) == 5


def _cbor_item_end(data: bytes, pos: int) -> int:
    initial = data[pos]
    major, info = initial >> 5, initial & 0x1F
    pos += 1
    if info < 24:
        arg = info
    elif info == 24:
        arg = data[pos]
        pos += 1
    elif info == 25:
        arg = int.from_bytes(data[pos:pos + 2], "big")
        pos += 2
    elif info == 26:
        arg = int.from_bytes(data[pos:pos + 4], "big")
        pos += 4
    elif info == 27:
        arg = int.from_bytes(data[pos:pos + 8], "big")
        pos += 8
    else:
        raise ValueError("indefinite-length or reserved CBOR item")
    if major in (0, 1, 7):  # ints, simple values
        return pos
    if major in (2, 3):  # byte/text string
        end = pos + arg
        if end > len(data):
            raise ValueError("string runs past end")
        return end
    if major == 4:  # array
        for _ in range(arg):
            pos = _cbor_item_end(data, pos)
        return pos
    if major == 5:  # map
        for _ in range(2 * arg):
            pos = _cbor_item_end(data, pos)
        return pos
    raise ValueError("tagged item")  # major 6, not produced by the compiler


# --------------------------------------------------------------------------
# AST normalization (modern nodeType-based and legacy name/children JSON)

_SCALARS = (str, int, float, bool, type(None))


def ast_from_json(doc: dict) -> AstNode:
    if "nodeType" in doc:
        return _modern_node(doc)
    if "name" in doc and ("children" in doc or "attributes" in doc):
        return _legacy_node(doc)
    raise MissingArtifact("unrecognized AST JSON shape")


def _parse_src(src) -> tuple[int, int, int]:
    if not isinstance(src, str):
        return (-1, 0, -1)
    parts = src.split(":")
    try:
        return (int(parts[0]), int(parts[1]), int(parts[2]) if len(parts) > 2 else -1)
    except (ValueError, IndexError):
        return (-1, 0, -1)


def _modern_node(doc: dict) -> AstNode:
    attributes: dict = {}
    children: list[AstNode] = []
    for key, value in doc.items():
        if key in ("src", "nodeType"):
            continue
        if isinstance(value, dict):
            if "nodeType" in value:
                child = _modern_node(value)
                child.attributes.setdefault("_field", key)
                children.append(child)
            else:
                # e.g. typeDescriptions: hoist its scalar members
                for sub_key, sub_value in value.items():
                    if isinstance(sub_value, _SCALARS) and sub_key not in attributes:
                        attributes[sub_key] = sub_value
        elif isinstance(value, list):
            for item in value:
                if isinstance(item, dict) and "nodeType" in item:
                    child = _modern_node(item)
                    child.attributes.setdefault("_field", key)
                    children.append(child)
        elif isinstance(value, _SCALARS):
            attributes[key] = value
    return AstNode(doc["nodeType"], _parse_src(doc.get("src")), children, attributes)


def _legacy_node(doc: dict) -> AstNode:
    attributes = {k: v for k, v in (doc.get("attributes") or {}).items()
                  if isinstance(v, _SCALARS)}
    children = [_legacy_node(c) for c in doc.get("children") or []]
    return AstNode(doc["name"], _parse_src(doc.get("src")), children, attributes)


# --------------------------------------------------------------------------
# version resolution

_SEMVER_RE = re.compile(r"(\d+)\.(\d+)\.(\d+)")
_PRAGMA_RE = re.compile(r"pragma\s+solidity\s+([^;]+);")
_COMPARATOR_RE = re.compile(r"(\^|~|>=|<=|>|<|=)?\s*v?(\d+)(?:\.(\d+))?(?:\.(\d+))?")


def parse_version(text: str) -> Version:
    match = _SEMVER_RE.search(text)
    if not match:
        raise VersionUnparseable(f"no semantic version in {text!r}")
    return (int(match.group(1)), int(match.group(2)), int(match.group(3)))


def version_from_pragma(source: str) -> Version:
    """Minimum version satisfying the pragma's lower bounds (deterministic)."""
    match = _PRAGMA_RE.search(source)
    if not match:
        raise VersionUnparseable("no solidity pragma found")
    constraint = match.group(1).split("||")[0]
    best: Version | None = None
    for m in _COMPARATOR_RE.finditer(constraint):
        op = m.group(1) or "="
        if op in ("<", "<="):
            continue
        version = (int(m.group(2)), int(m.group(3) or 0), int(m.group(4) or 0))
        if op == ">":
            version = (version[0], version[1], version[2] + 1)
        if best is None or version > best:
            best = version
    if best is None:
        raise VersionUnparseable(f"no lower bound in pragma {constraint!r}")
    return best


def resolve_version(metadata_text: str | None, sources: list[tuple[int, str]]) -> Version:
    if metadata_text:
        try:
            meta = json.loads(metadata_text)
            raw = meta.get("compiler", {}).get("version", "")
            if raw:
                return parse_version(raw)
        except (json.JSONDecodeError, VersionUnparseable):
            pass
    for _, text in sources:
        try:
            return version_from_pragma(text)
        except VersionUnparseable:
            continue
    raise VersionUnparseable("no compiler version in metadata or pragma")


# --------------------------------------------------------------------------
# loading

def load_compilation(artifact_path) -> CompilationUnit:
    """Load one contract's artifacts; raises when the path holds none or many."""
    units = load_all(artifact_path)
    if not units:
        raise MissingArtifact(f"no contract artifacts under {artifact_path}")
    if len(units) > 1:
        names = ", ".join(u.contract_name for u in units)
        raise MissingArtifact(f"multiple contracts ({names}); use load_all")
    return units[0]


def load_all(artifact_path) -> list[CompilationUnit]:
    path = Path(artifact_path)
    if path.is_dir():
        return _load_directory(path)
    if path.is_file():
        return _load_standard_json(path)
    raise MissingArtifact(f"{path} does not exist")


def _validate(unit: CompilationUnit) -> CompilationUnit:
    if not unit.runtime_bytecode:
        raise MissingArtifact(f"{unit.contract_name}: empty runtime bytecode")
    n_instrs = count_instructions(unit.runtime_bytecode)
    if len(unit.source_map) != n_instrs:
        raise MapLengthMismatch(
            f"{unit.contract_name}: {len(unit.source_map)} source-map entries "
            f"for {n_instrs} instructions"
        )
    file_ids = {fid for fid, _ in unit.sources}
    for entry in unit.source_map:
        if entry.file < 0:
            continue
        if entry.file not in file_ids:
            raise MissingArtifact(
                f"{unit.contract_name}: source-map entry refers to unknown file {entry.file}"
            )
        text = unit.source_text(entry.file)
        if entry.start < 0 or entry.length < 0 or entry.start + entry.length > len(text):
            raise MissingArtifact(
                f"{unit.contract_name}: source-map span {entry.start}:{entry.length} "
                f"out of bounds for file {entry.file}"
            )
    return unit


def _load_directory(path: Path) -> list[CompilationUnit]:
    units = []
    for bin_path in sorted(path.glob("*.bin-runtime")):
        name = bin_path.name[:-len(".bin-runtime")]
        ast_path = path / f"{name}.ast.json"
        srcmap_path = path / f"{name}.srcmap-runtime"
        sol_path = path / f"{name}.sol"
        if not ast_path.exists():
            raise MissingArtifact(f"{ast_path} missing")
        if not srcmap_path.exists():
            raise MissingArtifact(f"{srcmap_path} missing")
        raw_hex = bin_path.read_text().strip().removeprefix("0x")
        bytecode = strip_metadata(bytes.fromhex(raw_hex))
        ast = ast_from_json(json.loads(ast_path.read_text()))
        source_map = decode_source_map(srcmap_path.read_text().strip())
        sources = [(0, sol_path.read_text())] if sol_path.exists() else []
        version = resolve_version(None, sources)
        units.append(_validate(CompilationUnit(name, bytecode, source_map, ast, sources, version)))
    return units


def _load_standard_json(path: Path) -> list[CompilationUnit]:
    doc = json.loads(path.read_text())
    if not isinstance(doc, dict):
        raise MissingArtifact(f"{path}: top level is not a JSON object")
    contracts = doc.get("contracts") or {}
    source_docs = doc.get("sources") or {}
    sources: list[tuple[int, str]] = []
    asts: dict[str, AstNode] = {}
    for file_name, entry in source_docs.items():
        fid = entry.get("id", len(sources))
        if "content" in entry:
            sources.append((fid, entry["content"]))
        if "ast" in entry:
            asts[file_name] = ast_from_json(entry["ast"])
    units = []
    for file_name, per_file in contracts.items():
        for contract_name, contract in per_file.items():
            evm = contract.get("evm", {})
            deployed = evm.get("deployedBytecode", {})
            hex_code = (deployed.get("object") or "").removeprefix("0x")
            if not hex_code:
                raise MissingArtifact(f"{contract_name}: no deployed bytecode")
            ast = asts.get(file_name)
            if ast is None:
                raise NoAstAvailable(file_name)
            bytecode = strip_metadata(bytes.fromhex(hex_code))
            source_map = decode_source_map(deployed.get("sourceMap", ""))
            version = resolve_version(contract.get("metadata"), sources)
            units.append(_validate(CompilationUnit(
                contract_name, bytecode, source_map, ast, sources, version)))
    return units


class NoAstAvailable(MissingArtifact):
    def __init__(self, file_name: str):
        super().__init__(f"no AST for source file {file_name}")
