"""Path-constraint collection and satisfiability over 256-bit vectors.

The collector is append-only; snapshots are immutable values. The default
backend is a self-contained decision procedure: structural contradiction
detection plus equality propagation gives unsat answers, and a randomized
concrete witness search gives sat answers. Anything it cannot decide within
its budget is reported as ``unknown``, which callers must treat as
"do not report" (precision first). A different backend (e.g. an SMT solver)
can be plugged in through the same adapter surface.

Negation here is structural only (eq <-> neq, ult <-> uge, ...); no semantic
normalization is applied, so differing owner expressions never cancel.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field, replace

from sleepscan import sym
from sleepscan.sym import Const, Op, SymValue, Var

EQ, NEQ = "eq", "neq"
ULT, UGT, ULE, UGE = "ult", "ugt", "ule", "uge"
SLT, SGT, SLE, SGE = "slt", "sgt", "sle", "sge"
NONZERO, ZERO = "nonzero", "zero"

_NEGATION = {
    EQ: NEQ, NEQ: EQ,
    ULT: UGE, UGE: ULT,
    UGT: ULE, ULE: UGT,
    SLT: SGE, SGE: SLT,
    SGT: SLE, SLE: SGT,
    NONZERO: ZERO, ZERO: NONZERO,
}

_SYMMETRIC = frozenset([EQ, NEQ])

SAT, UNSAT, UNKNOWN = "sat", "unsat", "unknown"


@dataclass(frozen=True)
class Constraint:
    relation: str
    lhs: SymValue
    rhs: SymValue = Const(0)
    pc: int = -1
    src: tuple[int, int, int] | None = None
    # True for an eq-candidate decomposed out of a satisfied disjunctive
    # guard: visible to contains(), never part of the conjunction solve() sees.
    candidate: bool = False

    def negated(self) -> "Constraint":
        return replace(self, relation=_NEGATION[self.relation])

    def same_sides(self, other: "Constraint") -> bool:
        # width masks are plumbing, not identity: and(x, 2^160-1) is the same
        # carrier as x for the purpose of structural matching
        lhs, rhs = sym.strip_masks(self.lhs), sym.strip_masks(self.rhs)
        other_lhs, other_rhs = sym.strip_masks(other.lhs), sym.strip_masks(other.rhs)
        if lhs == other_lhs and rhs == other_rhs:
            return True
        if self.relation in _SYMMETRIC and other.relation in _SYMMETRIC:
            return lhs == other_rhs and rhs == other_lhs
        return False

    def holds(self, env: dict[Var, int]) -> bool:
        a = sym.evaluate(self.lhs, env)
        b = sym.evaluate(self.rhs, env)
        return _relation_holds(self.relation, a, b)

    def __repr__(self):
        return f"({self.lhs!r} {self.relation} {self.rhs!r})"


def _relation_holds(relation: str, a: int, b: int) -> bool:
    if relation == EQ:
        return a == b
    if relation == NEQ:
        return a != b
    if relation == ULT:
        return a < b
    if relation == UGT:
        return a > b
    if relation == ULE:
        return a <= b
    if relation == UGE:
        return a >= b
    if relation == NONZERO:
        return a != 0
    if relation == ZERO:
        return a == 0
    sa = a - (1 << 256) if a >> 255 else a
    sb = b - (1 << 256) if b >> 255 else b
    if relation == SLT:
        return sa < sb
    if relation == SGT:
        return sa > sb
    if relation == SLE:
        return sa <= sb
    if relation == SGE:
        return sa >= sb
    raise KeyError(relation)


@dataclass(frozen=True)
class ConstraintSet:
    entries: tuple[Constraint, ...] = ()

    def push(self, constraint: Constraint) -> "ConstraintSet":
        return ConstraintSet(self.entries + (constraint,))

    def hard(self) -> tuple[Constraint, ...]:
        return tuple(c for c in self.entries if not c.candidate)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


# --------------------------------------------------------------------------
# structural pattern queries

@dataclass(frozen=True)
class ConstraintPattern:
    """Relation kind plus provenance requirements on each side.

    Side predicates receive the mask-stripped expression; a match in either
    orientation counts for symmetric relations.
    """
    relation: str
    lhs_pred: "SidePredicate"
    rhs_pred: "SidePredicate"


SidePredicate = "callable[[SymValue], bool]"


def contains(cset: ConstraintSet, pattern: ConstraintPattern) -> bool:
    """Structural match over all collected constraints, candidates included.

    Side predicates receive the raw expressions; helpers below peel width
    masks themselves so the 160-bit heuristic can still see them.
    """
    for constraint in cset:
        if constraint.relation != pattern.relation:
            continue
        if pattern.lhs_pred(constraint.lhs) and pattern.rhs_pred(constraint.rhs):
            return True
        if pattern.relation in _SYMMETRIC \
                and pattern.lhs_pred(constraint.rhs) and pattern.rhs_pred(constraint.lhs):
            return True
    return False


def is_caller(value: SymValue) -> bool:
    value = sym.strip_masks(value)
    return isinstance(value, Var) and isinstance(value.kind, sym.Environment) \
        and value.kind.which == "caller"


def is_storage_direct_address(value: SymValue) -> bool:
    base = sym.strip_masks(value)
    if not (isinstance(base, Var) and isinstance(base.kind, sym.StorageDirect)):
        return False
    if "[...]" in base.kind.source_name:
        return False
    # declared address type when the layout resolved it, else the presence of
    # a 160-bit mask on the loaded word
    return base.is_address or base is not value


# --------------------------------------------------------------------------
# solving

class InternalSolver:
    """Bit-vector conjunction decision procedure (structural + witness search)."""

    def __init__(self, max_tries: int = 48, seed: int = 0x5EED):
        self.max_tries = max_tries
        self.seed = seed

    def solve(self, constraints: tuple[Constraint, ...], timeout_seconds: float = 10.0) -> str:
        deadline = time.monotonic() + timeout_seconds
        simplified = []
        for constraint in constraints:
            if isinstance(constraint.lhs, Const) and isinstance(constraint.rhs, Const):
                if not _relation_holds(constraint.relation,
                                       constraint.lhs.value, constraint.rhs.value):
                    return UNSAT
                continue
            simplified.append(constraint)
        if self._structurally_unsat(simplified):
            return UNSAT
        if not simplified:
            return SAT
        if self._find_witness(simplified, deadline):
            return SAT
        return UNKNOWN

    # -- unsat side ---------------------------------------------------------

    def _structurally_unsat(self, constraints: list[Constraint]) -> bool:
        for i, a in enumerate(constraints):
            negated = a.negated()
            for b in constraints[i + 1:]:
                if b.relation == negated.relation and b.same_sides(negated):
                    return True
        return self._equality_conflict(constraints)

    def _equality_conflict(self, constraints: list[Constraint]) -> bool:
        parent: dict[SymValue, SymValue] = {}

        def find(x: SymValue) -> SymValue:
            parent.setdefault(x, x)
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(x: SymValue, y: SymValue):
            parent[find(x)] = find(y)

        for c in constraints:
            if c.relation == EQ:
                union(c.lhs, c.rhs)
            elif c.relation == ZERO:
                union(c.lhs, Const(0))
            elif c.relation == NONZERO and isinstance(c.lhs, Const):
                pass
        # a class holding two distinct constants is contradictory
        const_of: dict[SymValue, int] = {}
        for node in list(parent):
            if isinstance(node, Const):
                root = find(node)
                if root in const_of and const_of[root] != node.value:
                    return True
                const_of[root] = node.value
        def class_const(root: SymValue) -> int | None:
            if root in const_of:
                return const_of[root]
            return root.value if isinstance(root, Const) else None

        for c in constraints:
            if c.relation == NEQ:
                left_root, right_root = find(c.lhs), find(c.rhs)
                if left_root == right_root:
                    return True
                left_const = class_const(left_root)
                if left_const is not None and left_const == class_const(right_root):
                    return True
            if c.relation == NONZERO and class_const(find(c.lhs)) == 0:
                return True
            if c.relation == ZERO:
                value = class_const(find(c.lhs))
                if value is not None and value != 0:
                    return True
        return False

    # -- sat side -----------------------------------------------------------

    def _find_witness(self, constraints: list[Constraint], deadline: float) -> bool:
        variables = sorted(
            {v for c in constraints for v in sym.free_vars(c.lhs) | sym.free_vars(c.rhs)},
            key=lambda v: v.name,
        )
        rng = random.Random(self.seed)
        for trial in range(self.max_tries):
            if time.monotonic() > deadline:
                return False
            env = self._initial_assignment(variables, rng, trial)
            for _ in range(4):  # repair passes for equality chains
                changed = False
                for c in constraints:
                    if c.holds(env):
                        continue
                    changed |= self._repair(c, env)
                if not changed:
                    break
            if all(c.holds(env) for c in constraints):
                return True
        return False

    def _initial_assignment(self, variables, rng, trial) -> dict[Var, int]:
        env = {}
        for i, var in enumerate(variables):
            if trial == 0:
                value = i + 1  # small, pairwise distinct
            elif trial == 1:
                value = 0
            else:
                width = 160 if var.is_address else 256
                value = rng.getrandbits(width)
            env[var] = value
        return env

    @staticmethod
    def _repair(constraint: Constraint, env: dict[Var, int]) -> bool:
        lhs, rhs = constraint.lhs, constraint.rhs
        if constraint.relation == EQ:
            if isinstance(lhs, Var):
                env[lhs] = sym.evaluate(rhs, env)
                return True
            if isinstance(rhs, Var):
                env[rhs] = sym.evaluate(lhs, env)
                return True
        elif constraint.relation == ZERO and isinstance(lhs, Var):
            env[lhs] = 0
            return True
        elif constraint.relation == NONZERO and isinstance(lhs, Var) and env[lhs] == 0:
            env[lhs] = 1
            return True
        elif constraint.relation == NEQ:
            if isinstance(lhs, Var):
                env[lhs] = (sym.evaluate(rhs, env) + 1) & sym.MASK256
                return True
            if isinstance(rhs, Var):
                env[rhs] = (sym.evaluate(lhs, env) + 1) & sym.MASK256
                return True
        return False


_DEFAULT_BACKEND: InternalSolver | None = None


def get_backend() -> InternalSolver:
    global _DEFAULT_BACKEND
    if _DEFAULT_BACKEND is None:
        _DEFAULT_BACKEND = InternalSolver()
    return _DEFAULT_BACKEND


def solve(cset: ConstraintSet, extra: tuple[Constraint, ...] = (),
          timeout_seconds: float = 10.0) -> str:
    """Satisfiability of the set's hard constraints plus ``extra``."""
    return get_backend().solve(cset.hard() + tuple(extra), timeout_seconds)
