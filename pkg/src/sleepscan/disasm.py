"""Disassembly, basic-block recovery and static CFG construction.

0x5F always decodes as PUSH0: compilers below 0.8.20 never emit it in
reachable code, so a version branch in the decoder buys nothing. The version
triple is still accepted for diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from sleepscan import _core, opcodes
from sleepscan.errors import TruncatedPush

Version = tuple[int, int, int]


@dataclass(frozen=True)
class Instruction:
    pc: int
    byte: int
    name: str
    immediate: bytes
    src: int  # index into the source map (= instruction ordinal)

    @property
    def push_value(self) -> int | None:
        if self.name == "PUSH0":
            return 0
        if self.immediate:
            return int.from_bytes(self.immediate, "big")
        return None

    @property
    def size(self) -> int:
        return 1 + len(self.immediate)

    def __str__(self) -> str:
        if self.immediate:
            return f"{self.name} 0x{self.immediate.hex()}"
        return self.name


@dataclass
class BasicBlock:
    start_pc: int
    instructions: list[Instruction]
    terminator: str  # jump / conditional-jump / stop / return / revert / invalid / selfdestruct / fallthrough

    @property
    def end_pc(self) -> int:
        last = self.instructions[-1]
        return last.pc + last.size


_TERMINATOR_KIND = {
    "JUMP": "jump",
    "JUMPI": "conditional-jump",
    "STOP": "stop",
    "RETURN": "return",
    "REVERT": "revert",
    "INVALID": "invalid",
    "SELFDESTRUCT": "selfdestruct",
}


@dataclass
class Cfg:
    blocks: list[BasicBlock]
    static_edges: list[tuple[int, int, str]]  # (from start_pc, to start_pc, fall|taken|not-taken)
    entry_points: dict[int, int] = field(default_factory=dict)  # selector -> pc
    block_by_pc: dict[int, BasicBlock] = field(default_factory=dict)
    instruction_by_pc: dict[int, Instruction] = field(default_factory=dict)

    def block_at(self, pc: int) -> BasicBlock | None:
        return self.block_by_pc.get(pc)


def disassemble(code: bytes, version: Version = (0, 8, 21)) -> list[Instruction]:
    """Decode metadata-stripped runtime bytecode into instructions."""
    raw, truncated_at = _core.decode_raw(bytes(code))
    if truncated_at >= 0:
        raise TruncatedPush(f"PUSH immediate at pc {truncated_at} overruns end of code")
    return [
        Instruction(pc, byte, opcodes.mnemonic(byte), imm, idx)
        for idx, (pc, byte, imm) in enumerate(raw)
    ]


def count_instructions(code: bytes) -> int:
    raw, truncated_at = _core.decode_raw(bytes(code))
    if truncated_at >= 0:
        raise TruncatedPush(f"PUSH immediate at pc {truncated_at} overruns end of code")
    return len(raw)


def build_cfg(instrs: list[Instruction]) -> Cfg:
    """Partition instructions into basic blocks and resolve PUSH-constant jumps."""
    if not instrs:
        return Cfg([], [])
    leaders: set[int] = {instrs[0].pc}
    by_pc: dict[int, Instruction] = {i.pc: i for i in instrs}
    for idx, ins in enumerate(instrs):
        if ins.name == "JUMPDEST":
            leaders.add(ins.pc)
        is_unknown = ins.byte not in opcodes.TABLE
        if ins.name in _TERMINATOR_KIND or is_unknown:
            if idx + 1 < len(instrs):
                leaders.add(instrs[idx + 1].pc)

    blocks: list[BasicBlock] = []
    current: list[Instruction] = []
    for ins in instrs:
        if ins.pc in leaders and current:
            blocks.append(_finish_block(current))
            current = []
        current.append(ins)
    if current:
        blocks.append(_finish_block(current))

    edges: list[tuple[int, int, str]] = []
    jumpdests = {i.pc for i in instrs if i.name == "JUMPDEST"}
    for idx, block in enumerate(blocks):
        last = block.instructions[-1]
        fall_target = blocks[idx + 1].start_pc if idx + 1 < len(blocks) else None
        if last.name == "JUMP":
            target = _adjacent_push_target(block)
            if target is not None and target in jumpdests:
                edges.append((block.start_pc, target, "taken"))
        elif last.name == "JUMPI":
            target = _adjacent_push_target(block)
            if target is not None and target in jumpdests:
                edges.append((block.start_pc, target, "taken"))
            if fall_target is not None:
                edges.append((block.start_pc, fall_target, "not-taken"))
        elif block.terminator == "fallthrough" and fall_target is not None:
            edges.append((block.start_pc, fall_target, "fall"))
    cfg = Cfg(blocks, edges)
    cfg.block_by_pc = {b.start_pc: b for b in blocks}
    cfg.instruction_by_pc = by_pc
    return cfg


def _finish_block(instrs: list[Instruction]) -> BasicBlock:
    last = instrs[-1]
    if last.byte not in opcodes.TABLE:
        kind = "invalid"
    else:
        kind = _TERMINATOR_KIND.get(last.name, "fallthrough")
    return BasicBlock(instrs[0].pc, list(instrs), kind)


def _adjacent_push_target(block: BasicBlock) -> int | None:
    if len(block.instructions) < 2:
        return None
    prev = block.instructions[-2]
    return prev.push_value


def find_function_entry(cfg: Cfg, selector: int) -> int | None:
    """Locate the JUMPDEST the dispatcher jumps to for ``selector``.

    Matches the conventional ``PUSH4 sel; EQ; PUSH dest; JUMPI`` pattern,
    tolerating a few interleaved instructions.
    """
    for block in cfg.blocks:
        instrs = block.instructions
        for i, ins in enumerate(instrs):
            if ins.name != "PUSH4" or ins.push_value != selector:
                continue
            for j in range(i + 1, min(i + 8, len(instrs))):
                nxt = instrs[j]
                if nxt.name == "JUMPI" and j > i + 1:
                    dest = instrs[j - 1].push_value
                    if dest is not None and _starts_with_jumpdest(cfg, dest):
                        return dest
    return None


def _starts_with_jumpdest(cfg: Cfg, pc: int) -> bool:
    block = cfg.block_at(pc)
    return block is not None and block.instructions[0].name == "JUMPDEST"


def dump_listing(instrs: list[Instruction], source_map=None, sources=None) -> str:
    """Debug text listing: ``pc: opcode immediate  ; source-snippet``."""
    lines = []
    source_by_id = dict(sources) if sources else {}
    for ins in instrs:
        snippet = ""
        if source_map is not None and ins.src < len(source_map):
            entry = source_map[ins.src]
            text = source_by_id.get(entry.file)
            if text is not None and entry.file >= 0:
                raw = text[entry.start:entry.start + entry.length]
                snippet = "  ; " + " ".join(raw.split())[:48]
        lines.append(f"{ins.pc:6d}: {ins}{snippet}")
    return "\n".join(lines)
