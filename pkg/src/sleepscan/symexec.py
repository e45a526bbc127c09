"""Symbolic execution of Transfer-emitting functions.

One exploration is single-threaded and owns its states; the information the
detectors need is gathered at four checkpoints: CALLDATALOAD (parameter
binding), SLOAD/SSTORE (storage provenance and the store mark), the source
span of ownerOf's return statement (owner trace), and LOG4 with the Transfer
topic hash (the emission snapshot). Execution continues past an emission so
the whole-function exit record exists for the end-of-function store check.

External calls are not followed: they produce a fresh value and taint the
path, and findings on tainted paths are downgraded, not suppressed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from sleepscan import constraints as con
from sleepscan import opcodes, sym
from sleepscan.astview import FunctionInfo, ReturnBinding
from sleepscan.constraints import Constraint, ConstraintSet
from sleepscan.disasm import Cfg, Instruction, find_function_entry
from sleepscan.errors import EntryNotFound
from sleepscan.ingestion import CompilationUnit
from sleepscan.keccak import TRANSFER_TOPIC
from sleepscan.sym import Const, FreshExternal, Op, Parameter, SymValue, Var

Span = tuple[int, int, int]

MAX_STACK = 1024

END_EMISSION = "transfer-emission"
END_EXIT = "normal-exit"
END_REVERT = "revert"
END_BUDGET = "budget-exhausted"


@dataclass
class ExplorationBudget:
    max_steps: int = 100_000
    max_paths: int = 512
    loop_bound: int = 3
    deadline: float | None = None  # absolute time.monotonic() cutoff

    def expired(self) -> bool:
        return self.deadline is not None and time.monotonic() > self.deadline


@dataclass(frozen=True)
class EventEmission:
    topic0: SymValue
    topics: tuple[SymValue, ...]
    data: tuple[SymValue, SymValue]  # (offset, size) memory slice descriptor
    at_pc: int


@dataclass(frozen=True)
class _EmissionSnapshot:
    emission: EventEmission
    constraints: ConstraintSet
    owner_trace: tuple[SymValue, ...]
    sstore_mark: bool
    tainted: bool
    src: Span | None


@dataclass
class MachineState:
    pc: int
    stack: list[SymValue] = field(default_factory=list)
    memory: list[tuple[SymValue, SymValue, int]] = field(default_factory=list)
    storage_writes: list[tuple[SymValue, SymValue]] = field(default_factory=list)
    constraints: ConstraintSet = field(default_factory=ConstraintSet)
    sstore_mark: bool = False
    owner_trace: tuple[SymValue, ...] = ()
    pending_owner: SymValue | None = None
    tainted: bool = False
    jumpdest_visits: dict[int, int] = field(default_factory=dict)
    snapshots: list[_EmissionSnapshot] = field(default_factory=list)

    def fork(self) -> "MachineState":
        return MachineState(
            pc=self.pc,
            stack=list(self.stack),
            memory=list(self.memory),
            storage_writes=list(self.storage_writes),
            constraints=self.constraints,
            sstore_mark=self.sstore_mark,
            owner_trace=self.owner_trace,
            pending_owner=self.pending_owner,
            tainted=self.tainted,
            jumpdest_visits=dict(self.jumpdest_visits),
            snapshots=list(self.snapshots),
        )


@dataclass(frozen=True)
class PathRecord:
    function: FunctionInfo
    end_kind: str
    constraints: ConstraintSet
    owner_trace: tuple[SymValue, ...]
    from_param: SymValue | None
    to_param: SymValue | None
    token_param: SymValue | None
    sstore_mark_at_emission: bool
    sstore_mark_at_exit: bool
    tainted: bool
    path_id: int
    emission_pc: int = -1
    emission_src: Span | None = None
    diagnostic: str | None = None


@dataclass
class ExplorationResult:
    records: list[PathRecord]
    timed_out: bool = False
    steps_used: int = 0
    paths_finished: int = 0


class _KillPath(Exception):
    """Internal: abandon the current path with a diagnostic end kind."""

    def __init__(self, end_kind: str, reason: str):
        self.end_kind = end_kind
        self.reason = reason


# --------------------------------------------------------------------------
# storage layout from the AST (sequential slots, no packing: a heuristic that
# holds for the unpacked layouts the detectors care about)

@dataclass(frozen=True)
class _SlotInfo:
    name: str
    type_string: str

    @property
    def is_mapping(self) -> bool:
        return self.type_string.strip().startswith("mapping")

    @property
    def is_address(self) -> bool:
        return self.type_string.strip() in ("address", "address payable")

    @property
    def mapping_value_is_address(self) -> bool:
        text = self.type_string.replace(" ", "")
        return text.endswith("=>address)") or text.endswith("=>addresspayable)")


def storage_layout(unit: CompilationUnit) -> dict[int, _SlotInfo]:
    layout: dict[int, _SlotInfo] = {}
    if unit.ast is None:
        return layout
    slot = 0
    for contract in unit.ast.find_all("ContractDefinition"):
        for child in contract.children:
            if child.node_kind != "VariableDeclaration":
                continue
            if child.get("stateVariable") is False:
                continue
            layout[slot] = _SlotInfo(child.get("name", f"slot{slot}"),
                                     child.get("typeString", ""))
            slot += 1
    return layout


# --------------------------------------------------------------------------

class Engine:
    def __init__(self, unit: CompilationUnit, cfg: Cfg, fn: FunctionInfo,
                 binding: ReturnBinding | None, budget: ExplorationBudget):
        self.unit = unit
        self.cfg = cfg
        self.fn = fn
        self.binding = binding
        self.budget = budget
        self.layout = storage_layout(unit)
        self.param_vars: dict[int, Var] = {}
        self.storage_vars: dict[str, Var] = {}
        self.memory_fresh: dict[str, Var] = {}
        self.site_fresh: dict[tuple[int, int], Var] = {}
        self.records: list[PathRecord] = []
        self.steps_used = 0
        self.paths_finished = 0
        self.next_path_id = 0
        self.timed_out = False

    # -- helpers ------------------------------------------------------------

    def _instr_at(self, pc: int) -> Instruction | None:
        return self.cfg.instruction_by_pc.get(pc)

    def _src_entry(self, instr: Instruction):
        if instr.src < len(self.unit.source_map):
            return self.unit.source_map[instr.src]
        return None

    def _fresh(self, pc: int, origin: str, is_address: bool = False) -> Var:
        key = (pc, origin)
        if key not in self.site_fresh:
            self.site_fresh[key] = Var(f"ext_{origin}_{pc}", FreshExternal(origin),
                                       is_address)
        return self.site_fresh[key]

    def _param_var(self, index: int) -> Var:
        if index not in self.param_vars:
            if index < len(self.fn.params):
                name, abi_type = self.fn.params[index]
                name = name or f"param_{index}"
                is_address = abi_type == "address"
            else:
                name, is_address = f"param_{index}", False
            self.param_vars[index] = Var(name, Parameter(index), is_address)
        return self.param_vars[index]

    def _storage_read(self, state: MachineState, slot: SymValue) -> SymValue:
        for written_slot, value in reversed(state.storage_writes):
            if written_slot == slot:
                return value
        key = repr(slot)
        if key in self.storage_vars:
            return self.storage_vars[key]
        var = self._name_storage(slot)
        self.storage_vars[key] = var
        return var

    def _name_storage(self, slot: SymValue) -> Var:
        base_slot = _mapping_base_slot(slot)
        if base_slot is not None:
            info = self.layout.get(base_slot)
            base_name = info.name if info else f"slot{base_slot}"
            name = f"{base_name}[...]"
            is_address = info.mapping_value_is_address if info else False
            return Var(name, sym.StorageMapping(slot, name), is_address)
        if isinstance(slot, Const):
            info = self.layout.get(slot.value)
            name = info.name if info else f"slot{slot.value}"
            return Var(name, sym.StorageDirect(slot, name),
                       info.is_address if info else False)
        name = f"storage@{slot!r}"
        return Var(name, sym.StorageDirect(slot, name), False)

    def _read_memory_word(self, state: MachineState, offset: SymValue) -> SymValue:
        for written_offset, value, width in reversed(state.memory):
            if width == 32 and written_offset == offset:
                return value
        key = repr(offset)
        if key not in self.memory_fresh:
            self.memory_fresh[key] = Var(f"mem_{len(self.memory_fresh)}",
                                         FreshExternal("memory"))
        return self.memory_fresh[key]

    # -- checkpoints --------------------------------------------------------

    def on_calldataload(self, state: MachineState, offset: SymValue) -> SymValue:
        value = sym.const_value(offset)
        if value is not None and value >= 4 and (value - 4) % 32 == 0:
            return self._param_var((value - 4) // 32)
        if value is not None:
            return self._fresh(state.pc, f"calldata_{value}")
        return self._fresh(state.pc, "calldata_sym")

    def on_sstore(self, state: MachineState, slot: SymValue, value: SymValue) -> None:
        state.storage_writes.append((slot, value))
        state.sstore_mark = True

    def on_log(self, state: MachineState, instr: Instruction, topic_count: int) -> None:
        offset = state.stack.pop()
        size = state.stack.pop()
        topics = tuple(state.stack.pop() for _ in range(topic_count))
        if topic_count != 4:
            return
        topic0 = topics[0]
        if not (isinstance(topic0, Const) and topic0.value == TRANSFER_TOPIC):
            return
        self._commit_pending_owner(state)
        entry = self._src_entry(instr)
        src = (entry.start, entry.length, entry.file) if entry else None
        emission = EventEmission(topic0, topics[1:], (offset, size), instr.pc)
        state.snapshots.append(_EmissionSnapshot(
            emission=emission,
            constraints=state.constraints,
            owner_trace=state.owner_trace,
            sstore_mark=state.sstore_mark,
            tainted=state.tainted,
            src=src,
        ))

    def _in_owner_return_span(self, instr: Instruction) -> bool:
        if self.binding is None:
            return False
        entry = self._src_entry(instr)
        if entry is None or entry.file < 0:
            return False
        span = (entry.start, entry.length, entry.file)
        for ret_span in self.binding.all_spans:
            if _span_contains(ret_span, span):
                return True
        return False

    def _owner_checkpoint(self, state: MachineState, instr: Instruction) -> None:
        if self._in_owner_return_span(instr):
            if state.stack:
                state.pending_owner = state.stack[-1]
        else:
            self._commit_pending_owner(state)

    def _commit_pending_owner(self, state: MachineState) -> None:
        pending = state.pending_owner
        state.pending_owner = None
        if pending is None:
            return
        if state.owner_trace and state.owner_trace[-1] == pending:
            return  # duplicate capture of the same return, collapse
        state.owner_trace = state.owner_trace + (pending,)

    # -- single-instruction semantics ---------------------------------------

    def step(self, state: MachineState, instr: Instruction) -> list[MachineState]:
        name = instr.name
        stack = state.stack
        entry = opcodes.TABLE.get(instr.byte)
        if entry is None:
            raise _KillPath(END_REVERT, f"unknown opcode 0x{instr.byte:02X} at {instr.pc}")
        _, _, pops, pushes = entry
        if len(stack) < pops:
            raise _KillPath(END_REVERT, f"stack underflow at {instr.pc} ({name})")
        if len(stack) - pops + pushes > MAX_STACK:
            raise _KillPath(END_REVERT, f"stack overflow at {instr.pc}")

        next_pc = instr.pc + instr.size

        if name.startswith("PUSH"):
            stack.append(Const(instr.push_value or 0))
        elif name.startswith("DUP"):
            stack.append(stack[-int(name[3:])])
        elif name.startswith("SWAP"):
            depth = int(name[4:])
            stack[-1], stack[-1 - depth] = stack[-1 - depth], stack[-1]
        elif name == "POP":
            stack.pop()
        elif name == "JUMPDEST":
            visits = state.jumpdest_visits.get(instr.pc, 0) + 1
            state.jumpdest_visits[instr.pc] = visits
            if visits > self.budget.loop_bound:
                raise _KillPath(END_BUDGET, f"loop bound at jumpdest {instr.pc}")
        elif name == "JUMP":
            target = stack.pop()
            state.pc = self._jump_target(target, instr)
            self._owner_checkpoint(state, instr)
            return [state]
        elif name == "JUMPI":
            target = stack.pop()
            condition = stack.pop()
            self._owner_checkpoint(state, instr)
            return self._branch(state, instr, target, condition, next_pc)
        elif name in ("STOP", "RETURN", "SELFDESTRUCT"):
            for _ in range(pops):
                stack.pop()
            self._finish_path(state, END_EXIT)
            return []
        elif name in ("REVERT", "INVALID"):
            for _ in range(pops):
                stack.pop()
            self._finish_path(state, END_REVERT)
            return []
        elif name == "CALLDATALOAD":
            offset = stack.pop()
            stack.append(self.on_calldataload(state, offset))
        elif name == "SLOAD":
            slot = stack.pop()
            stack.append(self._storage_read(state, slot))
        elif name == "SSTORE":
            slot = stack.pop()
            value = stack.pop()
            self.on_sstore(state, slot, value)
        elif name == "SHA3":
            offset = stack.pop()
            size = stack.pop()
            stack.append(self._sha3(state, offset, size))
        elif name == "MLOAD":
            offset = stack.pop()
            stack.append(self._read_memory_word(state, offset))
        elif name == "MSTORE":
            offset = stack.pop()
            value = stack.pop()
            state.memory.append((offset, value, 32))
        elif name == "MSTORE8":
            offset = stack.pop()
            value = stack.pop()
            state.memory.append((offset, value, 1))
        elif name.startswith("LOG"):
            self.on_log(state, instr, int(name[3:]))
        elif name in _ENVIRONMENT_VARS:
            var_name, which, is_address = _ENVIRONMENT_VARS[name]
            stack.append(Var(var_name, sym.Environment(which), is_address))
        elif name in ("CALL", "CALLCODE", "DELEGATECALL", "STATICCALL", "CREATE", "CREATE2"):
            for _ in range(pops):
                stack.pop()
            state.tainted = True
            stack.append(self._fresh(instr.pc, "call"))
        elif name.lower() in sym.FOLDABLE:
            args = tuple(stack.pop() for _ in range(pops))
            stack.append(sym.make_op(name.lower(), *args))
        else:
            # remaining environment/introspection opcodes: fresh value per site
            for _ in range(pops):
                stack.pop()
            if pushes:
                stack.append(self._fresh(instr.pc, name.lower()))

        state.pc = next_pc
        self._owner_checkpoint(state, instr)
        return [state]

    def _sha3(self, state: MachineState, offset: SymValue, size: SymValue) -> SymValue:
        size_value = sym.const_value(size)
        offset_value = sym.const_value(offset)
        if size_value in (32, 64) and offset_value is not None:
            words = []
            for word_index in range(size_value // 32):
                words.append(self._read_memory_word(state, Const(offset_value + 32 * word_index)))
            return Op("sha3", tuple(words))
        return self._fresh(state.pc, "sha3_unresolved")

    def _jump_target(self, target: SymValue, instr: Instruction) -> int:
        value = sym.const_value(target)
        if value is None:
            raise _KillPath(END_REVERT, f"symbolic jump target at {instr.pc}")
        dest = self.cfg.instruction_by_pc.get(value)
        if dest is None or dest.name != "JUMPDEST":
            raise _KillPath(END_REVERT, f"jump to non-JUMPDEST {value} at {instr.pc}")
        return value

    def _branch(self, state: MachineState, instr: Instruction,
                target: SymValue, condition: SymValue, next_pc: int) -> list[MachineState]:
        value = sym.const_value(condition)
        if value is not None:
            if value:
                state.pc = self._jump_target(target, instr)
            else:
                state.pc = next_pc
            return [state]
        entry = self._src_entry(instr)
        src = (entry.start, entry.length, entry.file) if entry else None
        taken = state
        fallthrough = state.fork()
        taken.pc = self._jump_target(target, instr)
        for c in _condition_constraints(condition, True, instr.pc, src):
            taken.constraints = taken.constraints.push(c)
        fallthrough.pc = next_pc
        for c in _condition_constraints(condition, False, instr.pc, src):
            fallthrough.constraints = fallthrough.constraints.push(c)
        return [taken, fallthrough]

    # -- path lifecycle -----------------------------------------------------

    def _finish_path(self, state: MachineState, end_kind: str,
                     diagnostic: str | None = None) -> None:
        self._commit_pending_owner(state)
        path_id = self.next_path_id
        self.next_path_id += 1
        self.paths_finished += 1
        if end_kind in (END_EXIT, END_BUDGET):
            emission_kind = END_EMISSION if end_kind == END_EXIT else END_BUDGET
            for snapshot in state.snapshots:
                self.records.append(self._emission_record(snapshot, state, path_id,
                                                          emission_kind))
        self.records.append(PathRecord(
            function=self.fn,
            end_kind=end_kind,
            constraints=state.constraints,
            owner_trace=state.owner_trace,
            from_param=self.param_vars.get(0),
            to_param=self.param_vars.get(1),
            token_param=self.param_vars.get(2),
            sstore_mark_at_emission=state.sstore_mark,
            sstore_mark_at_exit=state.sstore_mark,
            tainted=state.tainted,
            path_id=path_id,
            diagnostic=diagnostic,
        ))

    def _emission_record(self, snapshot: _EmissionSnapshot, state: MachineState,
                         path_id: int, end_kind: str) -> PathRecord:
        topics = snapshot.emission.topics
        return PathRecord(
            function=self.fn,
            end_kind=end_kind,
            constraints=snapshot.constraints,
            owner_trace=snapshot.owner_trace,
            from_param=self.param_vars.get(0) or (topics[0] if topics else None),
            to_param=self.param_vars.get(1) or (topics[1] if len(topics) > 1 else None),
            token_param=self.param_vars.get(2) or (topics[2] if len(topics) > 2 else None),
            sstore_mark_at_emission=snapshot.sstore_mark,
            sstore_mark_at_exit=state.sstore_mark,
            tainted=snapshot.tainted,
            path_id=path_id,
            emission_pc=snapshot.emission.at_pc,
            emission_src=snapshot.src,
        )

    # -- exploration loop ---------------------------------------------------

    def explore(self, entry_pc: int) -> ExplorationResult:
        worklist = [MachineState(pc=entry_pc)]
        while worklist:
            if self.budget.expired():
                self.timed_out = True
                for state in worklist:
                    self._finish_path(state, END_BUDGET, "wall-clock timeout")
                break
            if self.paths_finished >= self.budget.max_paths:
                for state in worklist:
                    self._finish_path(state, END_BUDGET, "path budget")
                break
            state = worklist.pop()
            instr = self._instr_at(state.pc)
            if instr is None:
                self._finish_path(state, END_REVERT, f"fell off code at pc {state.pc}")
                continue
            if self.steps_used >= self.budget.max_steps:
                self._finish_path(state, END_BUDGET, "step budget")
                continue
            self.steps_used += 1
            try:
                successors = self.step(state, instr)
            except _KillPath as kill:
                self._finish_path(state, kill.end_kind, kill.reason)
                continue
            worklist.extend(successors)
        return ExplorationResult(self.records, self.timed_out,
                                 self.steps_used, self.paths_finished)


_ENVIRONMENT_VARS = {
    "CALLER": ("msg.sender", "caller", True),
    "ADDRESS": ("this.address", "address", True),
    "ORIGIN": ("tx.origin", "origin", True),
    "CALLVALUE": ("msg.value", "callvalue", False),
    "TIMESTAMP": ("block.timestamp", "timestamp", False),
    "NUMBER": ("block.number", "number", False),
}

_COMPARISON_TO_RELATION = {
    "eq": (con.EQ, con.NEQ),
    "lt": (con.ULT, con.UGE),
    "gt": (con.UGT, con.ULE),
    "slt": (con.SLT, con.SGE),
    "sgt": (con.SGT, con.SLE),
}


def _condition_constraints(condition: SymValue, truthy: bool, pc: int,
                           src: Span | None) -> list[Constraint]:
    """Relational constraint for a branch condition, plus eq-candidates
    decomposed from satisfied disjunctions."""
    out = [_relational(condition, truthy, pc, src)]
    if truthy:
        for leaf in _disjunct_eq_leaves(condition):
            out.append(Constraint(con.EQ, leaf.args[0], leaf.args[1],
                                  pc, src, candidate=True))
    return out


def _relational(condition: SymValue, truthy: bool, pc: int, src: Span | None) -> Constraint:
    while isinstance(condition, Op) and condition.op == "iszero":
        condition = condition.args[0]
        truthy = not truthy
    if isinstance(condition, Op) and condition.op in _COMPARISON_TO_RELATION:
        positive, negative = _COMPARISON_TO_RELATION[condition.op]
        relation = positive if truthy else negative
        return Constraint(relation, condition.args[0], condition.args[1], pc, src)
    relation = con.NONZERO if truthy else con.ZERO
    return Constraint(relation, condition, Const(0), pc, src)


def _disjunct_eq_leaves(condition: SymValue) -> list[Op]:
    if not (isinstance(condition, Op) and condition.op == "or"):
        return []
    leaves: list[Op] = []
    stack = list(condition.args)
    while stack:
        node = stack.pop()
        if isinstance(node, Op) and node.op == "or":
            stack.extend(node.args)
        elif isinstance(node, Op) and node.op == "eq":
            leaves.append(node)
    return leaves


def _mapping_base_slot(slot: SymValue) -> int | None:
    """Base storage slot constant of a (possibly nested) hashed mapping access."""
    if not (isinstance(slot, Op) and slot.op == "sha3"):
        return None
    last = slot.args[-1]
    if isinstance(last, Const):
        return last.value
    return _mapping_base_slot(last)


def _span_contains(outer: Span, inner: Span) -> bool:
    return (outer[2] == inner[2]
            and inner[0] >= outer[0]
            and inner[0] + inner[1] <= outer[0] + outer[1])


def explore_function(unit: CompilationUnit, cfg: Cfg, fn: FunctionInfo,
                     binding: ReturnBinding | None,
                     budget: ExplorationBudget | None = None) -> ExplorationResult:
    """Explore ``fn`` from its dispatcher entry; returns all path records."""
    if budget is None:
        budget = ExplorationBudget()
    if fn.selector is None:
        raise EntryNotFound(f"{fn.name} has no selector (visibility {fn.visibility})")
    entry_pc = cfg.entry_points.get(fn.selector)
    if entry_pc is None:
        entry_pc = find_function_entry(cfg, fn.selector)
    if entry_pc is None:
        raise EntryNotFound(f"no dispatcher entry for {fn.name} "
                            f"(selector 0x{fn.selector:08x})")
    engine = Engine(unit, cfg, fn, binding, budget)
    return engine.explore(entry_pc)
