"""Textual IR trace parsing, instruction energy groups and dependency tables.

Trace grammar (one instruction per line, in dynamic execution order)::

    %r = <opcode> [flags] <type> <operand>, <operand>       ; binary ops
    %r = icmp|fcmp <pred> <type> <operand>, <operand>
    %r = load <type>, <type>* %ptr [, align N]
    %r = alloca <type> [, align N]
    store <type> <operand>, <type>* %ptr [, align N]
    br label %bb  |  br i1 <operand>, label %a, label %b
    ret void  |  ret <type> <operand>

An operand is a register (``%`` followed by alphanumerics) or a numeric
literal. ``; cycles=N`` at the end of a line sets that instruction's latency;
any other ``;`` starts a comment. Blank and comment-only lines are skipped and
do not consume an instruction number.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping, NamedTuple

OPCODES = (
    "load", "store", "add", "sub", "mul", "fadd", "fsub", "fmul",
    "sdiv", "udiv", "fdiv", "srem", "urem", "frem", "icmp", "fcmp",
    "br", "ret", "alloca",
)

DATA_SIZE = {"i1": 1, "i32": 4, "float": 4, "i64": 8, "double": 8, "ptr": 8}

BINARY_OPS = frozenset(
    {"add", "sub", "mul", "fadd", "fsub", "fmul", "sdiv", "udiv", "fdiv", "srem", "urem", "frem"}
)
_FLAGS = frozenset(
    {"nsw", "nuw", "exact", "fast", "nnan", "ninf", "nsz", "arcp", "contract", "afn", "reassoc"}
)

_REG = re.compile(r"%[A-Za-z0-9]+")
_NUM = re.compile(r"[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?")
_CYCLES = re.compile(r";\s*cycles\s*=\s*(\d+)\s*$")
_ALIGN = re.compile(r"^align\s+\d+$")


class InstructionGroup(str, Enum):
    M = "M"  # memory
    B = "B"  # program flow
    D = "D"  # division
    G = "G"  # everything else


_GROUP_OF = {op: InstructionGroup.G for op in OPCODES}
_GROUP_OF.update({op: InstructionGroup.M for op in ("load", "store", "alloca")})
_GROUP_OF.update({op: InstructionGroup.B for op in ("br", "ret")})
_GROUP_OF.update({op: InstructionGroup.D for op in ("sdiv", "udiv", "fdiv", "srem", "urem", "frem")})


def _default_latencies() -> dict[str, int]:
    lat = {op: 1 for op in OPCODES}
    lat.update(load=2, store=2)
    for op in OPCODES:
        if _GROUP_OF[op] is InstructionGroup.D:
            lat[op] = 10
    return lat


DEFAULT_LATENCY: Mapping[str, int] = _default_latencies()


class TraceSyntaxError(ValueError):
    """Raised for malformed trace lines; carries the 1-based document line."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class Instruction:
    line_no: int
    opcode: str
    result_reg: str | None
    source_regs: tuple[str, ...]
    value_type: str
    latency: int
    store_ptr: str | None = None

    @property
    def data_size(self) -> int:
        return DATA_SIZE[self.value_type]

    @property
    def dest_reg(self) -> str | None:
        """Register this instruction writes (the pointer, for a store)."""
        return self.store_ptr if self.opcode == "store" else self.result_reg

    @property
    def group(self) -> InstructionGroup:
        return classify(self)


@dataclass(frozen=True)
class TraceProgram:
    instructions: tuple[Instruction, ...] = ()

    def __len__(self) -> int:
        return len(self.instructions)

    def __iter__(self) -> Iterator[Instruction]:
        return iter(self.instructions)

    def __getitem__(self, line_no: int) -> Instruction:
        return self.instructions[line_no - 1]


class Dependency(NamedTuple):
    producer: int
    latency: int
    data_size: int


@dataclass
class DependencyTables:
    src_table: dict[str, list[int]] = field(default_factory=dict)
    dest_table: dict[str, int] = field(default_factory=dict)
    dep_table: dict[int, list[Dependency]] = field(default_factory=dict)

    def dep_lines(self) -> dict[int, list[int]]:
        return {k: [d.producer for d in v] for k, v in self.dep_table.items()}

    def format(self) -> str:
        """Three-column text view listing line numbers only.

        Source registers read on the same set of lines share one row, the
        way a hand-drawn table would group them.
        """
        grouped: dict[tuple[int, ...], list[str]] = {}
        for reg, lines in self.src_table.items():
            grouped.setdefault(tuple(lines), []).append(reg)
        src_rows = [(", ".join(regs), ",".join(map(str, lines))) for lines, regs in grouped.items()]
        dest_rows = [(reg, str(line)) for reg, line in self.dest_table.items()]
        dep_rows = [(str(k), ",".join(str(d.producer) for d in v)) for k, v in self.dep_table.items()]
        n = max(len(src_rows), len(dest_rows), len(dep_rows), 0)
        cols = [src_rows, dest_rows, dep_rows]
        out = ["Src Key | Src Value | Dest Key | Dest Value | Dep Key | Dep Value"]
        for i in range(n):
            cells: list[str] = []
            for rows in cols:
                cells.extend(rows[i] if i < len(rows) else ("", ""))
            out.append(" | ".join(cells).rstrip(" |"))
        return "\n".join(out)


@dataclass(frozen=True)
class EnergyTable:
    """Energy per executed instruction, joules, for each group.

    The defaults are arbitrary placeholders of plausible magnitude, not
    measured values; supply a calibrated table for real estimates.
    """

    cost: Mapping[InstructionGroup, float] = field(
        default_factory=lambda: {
            InstructionGroup.M: 3e-12,
            InstructionGroup.B: 1e-12,
            InstructionGroup.D: 5e-12,
            InstructionGroup.G: 1e-12,
        }
    )

    def __post_init__(self):
        cost = {InstructionGroup(k): float(v) for k, v in self.cost.items()}
        missing = set(InstructionGroup) - set(cost)
        if missing:
            raise ValueError(f"energy table missing groups: {sorted(g.value for g in missing)}")
        if any(v < 0 for v in cost.values()):
            raise ValueError("energy costs must be non-negative")
        object.__setattr__(self, "cost", cost)

    def __getitem__(self, group: InstructionGroup | str) -> float:
        return self.cost[InstructionGroup(group)]

    def to_dict(self) -> dict[str, float]:
        return {g.value: self.cost[g] for g in InstructionGroup}


def classify(instr: Instruction | str) -> InstructionGroup:
    opcode = instr if isinstance(instr, str) else instr.opcode
    return _GROUP_OF[opcode]


def node_energy(counts: Mapping[InstructionGroup | str, int], table: EnergyTable) -> float:
    """Energy of a sequential program given its per-group instruction counts."""
    total = 0.0
    for group, n in counts.items():
        if n < 0:
            raise ValueError("instruction counts must be non-negative")
        total += table[group] * n
    return total


def group_counts(prog: TraceProgram) -> dict[InstructionGroup, int]:
    counts = {g: 0 for g in InstructionGroup}
    for ins in prog:
        counts[ins.group] += 1
    return counts


# -- parsing -------------------------------------------------------------------

def _split_operands(text: str) -> list[str]:
    return [t.strip() for t in text.split(",")]


def _check_type(tok: str, lineno: int, allow_ptr: bool = False) -> str:
    base = tok.rstrip("*")
    if tok.endswith("*") or tok == "ptr":
        if not allow_ptr:
            raise TraceSyntaxError(lineno, f"unexpected pointer type {tok!r}")
        return "ptr"
    if base not in DATA_SIZE or base == "ptr":
        raise TraceSyntaxError(lineno, f"unknown type {tok!r}")
    return base


def _operand(tok: str, lineno: int) -> str | None:
    """Return the register name, or None for a literal operand."""
    if tok.startswith("%"):
        if not _REG.fullmatch(tok):
            raise TraceSyntaxError(lineno, f"malformed register token {tok!r}")
        return tok
    if _NUM.fullmatch(tok) or tok in ("true", "false"):
        return None
    raise TraceSyntaxError(lineno, f"bad operand {tok!r}")


def _reg(tok: str, lineno: int) -> str:
    reg = _operand(tok, lineno)
    if reg is None:
        raise TraceSyntaxError(lineno, f"expected a register, got {tok!r}")
    return reg


def _typed_operand(text: str, lineno: int, allow_ptr: bool = False) -> tuple[str, str | None]:
    parts = text.split()
    if len(parts) != 2:
        raise TraceSyntaxError(lineno, f"expected '<type> <operand>', got {text!r}")
    return _check_type(parts[0], lineno, allow_ptr), _operand(parts[1], lineno)


def _strip_align(ops: list[str], lineno: int) -> list[str]:
    if ops and ops[-1].startswith("align"):
        if not _ALIGN.match(ops[-1]):
            raise TraceSyntaxError(lineno, f"bad alignment {ops[-1]!r}")
        ops = ops[:-1]
    return ops


def _dedup(regs) -> tuple[str, ...]:
    return tuple(dict.fromkeys(r for r in regs if r is not None))


def _parse_line(body: str, lineno: int) -> tuple[str, str | None, tuple[str, ...], str, str | None]:
    """Returns (opcode, result, sources, value_type, store_ptr)."""
    result = None
    if "=" in body:
        lhs, body = (s.strip() for s in body.split("=", 1))
        result = _reg(lhs, lineno)
    head, _, rest = body.partition(" ")
    opcode = head.strip()
    rest = rest.strip()
    if opcode not in OPCODES:
        raise TraceSyntaxError(lineno, f"unknown opcode {opcode!r}")

    if opcode in ("store", "br", "ret"):
        if result is not None:
            raise TraceSyntaxError(lineno, f"{opcode} cannot have a result register")
    elif result is None:
        raise TraceSyntaxError(lineno, f"{opcode} needs a result register")

    if opcode == "store":
        ops = _strip_align(_split_operands(rest), lineno)
        if len(ops) != 2:
            raise TraceSyntaxError(lineno, "store expects '<type> <value>, <type>* <ptr>'")
        vtype, val = _typed_operand(ops[0], lineno)
        ptype, ptr = _typed_operand(ops[1], lineno, allow_ptr=True)
        if ptype != "ptr" or ptr is None:
            raise TraceSyntaxError(lineno, "store destination must be a pointer register")
        return opcode, None, _dedup([val]), vtype, ptr

    if opcode == "load":
        ops = _strip_align(_split_operands(rest), lineno)
        if len(ops) != 2:
            raise TraceSyntaxError(lineno, "load expects '<type>, <type>* <ptr>'")
        vtype = _check_type(ops[0], lineno, allow_ptr=True)
        ptype, ptr = _typed_operand(ops[1], lineno, allow_ptr=True)
        if ptype != "ptr" or ptr is None:
            raise TraceSyntaxError(lineno, "load source must be a pointer register")
        return opcode, result, (ptr,), vtype, None

    if opcode == "alloca":
        ops = _strip_align(_split_operands(rest), lineno)
        if len(ops) != 1:
            raise TraceSyntaxError(lineno, "alloca expects '<type>'")
        _check_type(ops[0], lineno, allow_ptr=True)
        return opcode, result, (), "ptr", None

    if opcode == "br":
        ops = _split_operands(rest)
        if len(ops) == 1:
            parts = ops[0].split()
            if len(parts) != 2 or parts[0] != "label":
                raise TraceSyntaxError(lineno, "br expects 'label %bb'")
            _reg(parts[1], lineno)
            return opcode, None, (), "i1", None
        if len(ops) != 3:
            raise TraceSyntaxError(lineno, "br expects 'i1 <cond>, label %a, label %b'")
        ctype, cond = _typed_operand(ops[0], lineno)
        if ctype != "i1":
            raise TraceSyntaxError(lineno, "branch condition must be i1")
        for lab in ops[1:]:
            parts = lab.split()
            if len(parts) != 2 or parts[0] != "label":
                raise TraceSyntaxError(lineno, f"bad branch target {lab!r}")
            _reg(parts[1], lineno)
        return opcode, None, _dedup([cond]), "i1", None

    if opcode == "ret":
        if rest == "void":
            return opcode, None, (), "i1", None
        vtype, val = _typed_operand(rest, lineno, allow_ptr=True)
        return opcode, None, _dedup([val]), vtype, None

    # binary arithmetic and comparisons
    words = rest.split(None, 1)
    if opcode in ("icmp", "fcmp"):
        if len(words) != 2:
            raise TraceSyntaxError(lineno, f"{opcode} expects a predicate")
        rest = words[1]
    else:
        while words and words[0] in _FLAGS:
            rest = words[1] if len(words) > 1 else ""
            words = rest.split(None, 1)
    ops = _split_operands(rest)
    if len(ops) != 2:
        raise TraceSyntaxError(lineno, f"{opcode} expects two operands")
    otype, a = _typed_operand(ops[0], lineno)
    b = _operand(ops[1], lineno)
    vtype = "i1" if opcode in ("icmp", "fcmp") else otype
    return opcode, result, _dedup([a, b]), vtype, None


def parse_trace(text: str, latencies: Mapping[str, int] | None = None) -> TraceProgram:
    lat_table = dict(DEFAULT_LATENCY)
    if latencies:
        lat_table.update(latencies)
    out: list[Instruction] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        latency = None
        m = _CYCLES.search(raw)
        if m:
            latency = int(m.group(1))
            raw = raw[: m.start()]
        body = raw.split(";", 1)[0].strip()
        if not body:
            if latency is not None:
                raise TraceSyntaxError(lineno, "cycle annotation without an instruction")
            continue
        opcode, result, sources, vtype, ptr = _parse_line(body, lineno)
        out.append(
            Instruction(
                line_no=len(out) + 1,
                opcode=opcode,
                result_reg=result,
                source_regs=sources,
                value_type=vtype,
                latency=lat_table[opcode] if latency is None else latency,
                store_ptr=ptr,
            )
        )
    return TraceProgram(tuple(out))


def build_tables(prog: TraceProgram) -> DependencyTables:
    """Replay the trace, filling source, destination and dependency tables.

    Reads bind to the most recent earlier write of the register; a register
    never written before its read yields no dependency (it is a graph input).
    """
    tables = DependencyTables()
    for ins in prog:
        for reg in ins.source_regs:
            tables.src_table.setdefault(reg, []).append(ins.line_no)
            producer_line = tables.dest_table.get(reg)
            if producer_line is None:
                continue
            producer = prog[producer_line]
            deps = tables.dep_table.setdefault(ins.line_no, [])
            if all(d.producer != producer_line for d in deps):
                deps.append(Dependency(producer_line, producer.latency, producer.data_size))
        if ins.dest_reg is not None:
            tables.dest_table[ins.dest_reg] = ins.line_no
    return tables
