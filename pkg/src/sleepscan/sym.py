"""Symbolic 256-bit expressions with provenance tags."""

from __future__ import annotations

from dataclasses import dataclass

from sleepscan.keccak import keccak256

MASK256 = (1 << 256) - 1
MASK160 = (1 << 160) - 1
SIGN_BIT = 1 << 255


# --------------------------------------------------------------------------
# provenance

@dataclass(frozen=True)
class Parameter:
    index: int


@dataclass(frozen=True)
class StorageDirect:
    slot: "SymValue"
    source_name: str


@dataclass(frozen=True)
class StorageMapping:
    slot: "SymValue"
    source_name: str  # carries the "[...]" marker

    def __post_init__(self):
        assert "[...]" in self.source_name


@dataclass(frozen=True)
class Environment:
    which: str  # caller | callvalue | address | timestamp | number | origin


@dataclass(frozen=True)
class FreshExternal:
    origin: str  # e.g. "call", "returndata", "calldata-symbolic-offset"


Provenance = Parameter | StorageDirect | StorageMapping | Environment | FreshExternal


# --------------------------------------------------------------------------
# expression nodes

@dataclass(frozen=True)
class Const:
    value: int

    def __post_init__(self):
        object.__setattr__(self, "value", self.value & MASK256)

    def __repr__(self):
        return f"0x{self.value:x}" if self.value > 9 else str(self.value)


@dataclass(frozen=True)
class Var:
    name: str
    kind: Provenance
    is_address: bool = False

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class Op:
    op: str
    args: tuple["SymValue", ...]

    def __repr__(self):
        return f"{self.op}({', '.join(map(repr, self.args))})"


SymValue = Const | Var | Op

ZERO = Const(0)
ONE = Const(1)


def is_const(value: SymValue) -> bool:
    return isinstance(value, Const)


def const_value(value: SymValue) -> int | None:
    return value.value if isinstance(value, Const) else None


def strip_masks(value: SymValue) -> SymValue:
    """Peel address/width masks so provenance matching sees the carrier Var."""
    while isinstance(value, Op) and value.op == "and":
        a, b = value.args
        if isinstance(b, Const) and b.value in (MASK160, MASK256):
            value = a
        elif isinstance(a, Const) and a.value in (MASK160, MASK256):
            value = b
        else:
            break
    return value


def free_vars(value: SymValue) -> set[Var]:
    out: set[Var] = set()
    stack = [value]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            out.add(node)
        elif isinstance(node, Op):
            stack.extend(node.args)
    return out


# --------------------------------------------------------------------------
# concrete evaluation (used by the solver's witness search and the
# interpreter's constant folding)

def _to_signed(x: int) -> int:
    return x - (1 << 256) if x & SIGN_BIT else x


def _sha3_concrete(args: tuple[int, ...]) -> int:
    payload = b"".join(a.to_bytes(32, "big") for a in args)
    return int.from_bytes(keccak256(payload), "big")


def eval_op(op: str, args: tuple[int, ...]) -> int:
    """Concrete 256-bit semantics for the modeled operator set."""
    a = args[0] if args else 0
    b = args[1] if len(args) > 1 else 0
    if op == "add":
        return (a + b) & MASK256
    if op == "mul":
        return (a * b) & MASK256
    if op == "sub":
        return (a - b) & MASK256
    if op == "div":
        return a // b if b else 0
    if op == "sdiv":
        if b == 0:
            return 0
        sa, sb = _to_signed(a), _to_signed(b)
        return (abs(sa) // abs(sb) * (1 if (sa < 0) == (sb < 0) else -1)) & MASK256
    if op == "mod":
        return a % b if b else 0
    if op == "smod":
        if b == 0:
            return 0
        sa, sb = _to_signed(a), _to_signed(b)
        return ((abs(sa) % abs(sb)) * (1 if sa >= 0 else -1)) & MASK256
    if op == "addmod":
        return (a + b) % args[2] if args[2] else 0
    if op == "mulmod":
        return (a * b) % args[2] if args[2] else 0
    if op == "exp":
        return pow(a, b, 1 << 256)
    if op == "signextend":
        if a >= 32:
            return b
        bit = 8 * a + 7
        if b & (1 << bit):
            return (b | (MASK256 - ((1 << (bit + 1)) - 1))) & MASK256
        return b & ((1 << (bit + 1)) - 1)
    if op == "lt":
        return int(a < b)
    if op == "gt":
        return int(a > b)
    if op == "slt":
        return int(_to_signed(a) < _to_signed(b))
    if op == "sgt":
        return int(_to_signed(a) > _to_signed(b))
    if op == "eq":
        return int(a == b)
    if op == "iszero":
        return int(a == 0)
    if op == "and":
        return a & b
    if op == "or":
        return a | b
    if op == "xor":
        return a ^ b
    if op == "not":
        return a ^ MASK256
    if op == "byte":
        return (b >> (8 * (31 - a))) & 0xFF if a < 32 else 0
    if op == "shl":
        return (b << a) & MASK256 if a < 256 else 0
    if op == "shr":
        return b >> a if a < 256 else 0
    if op == "sar":
        if a >= 256:
            return MASK256 if b & SIGN_BIT else 0
        return (_to_signed(b) >> a) & MASK256
    if op == "sha3":
        return _sha3_concrete(args)
    raise KeyError(op)


FOLDABLE = frozenset([
    "add", "mul", "sub", "div", "sdiv", "mod", "smod", "addmod", "mulmod",
    "exp", "signextend", "lt", "gt", "slt", "sgt", "eq", "iszero",
    "and", "or", "xor", "not", "byte", "shl", "shr", "sar",
])


def make_op(op: str, *args: SymValue) -> SymValue:
    """Build an Op node, folding to a Const when every operand is concrete."""
    if op in FOLDABLE and all(isinstance(a, Const) for a in args):
        return Const(eval_op(op, tuple(a.value for a in args)))
    return Op(op, tuple(args))


def evaluate(value: SymValue, env: dict[Var, int]) -> int:
    """Evaluate under a concrete assignment; sha3 is computed for real, so
    distinct keys hash apart (the injectivity the mapping model needs)."""
    if isinstance(value, Const):
        return value.value
    if isinstance(value, Var):
        return env[value]
    return eval_op(value.op, tuple(evaluate(a, env) for a in value.args))
