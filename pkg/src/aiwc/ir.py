"""Parser for the `.aiwck` mini kernel IR.

A kernel file holds one kernel: a `kernel name(buf, ...)` header followed
by labeled basic blocks of one instruction per line.  Operands are
registers `r<n>`, launch built-ins (`gid0..2`, `lid0..2`, `grp0..2`,
`gsz0..2`, `lsz0..2`) or decimal immediates; opcodes take an optional
vector-width suffix `.x<w>`.  `;` starts a comment.

Every instruction keeps its 1-based source line, which doubles as the
branch site id in traces.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .errors import MissingTerminator, ParseError, UndefinedLabel, UseBeforeDef

BUILTINS = tuple(
    f"{base}{d}" for base in ("gid", "lid", "grp", "gsz", "lsz") for d in range(3)
)
_BUILTIN_INDEX = {name: i for i, name in enumerate(BUILTINS)}

# opcode name -> source-operand count; `f`-prefixed spellings alias these
OPCODE_ARITY = {
    "mov": 1, "not": 1, "neg": 1, "abs": 1,
    "add": 2, "sub": 2, "mul": 2, "div": 2, "rem": 2, "mod": 2,
    "and": 2, "or": 2, "xor": 2, "shl": 2, "shr": 2,
    "min": 2, "max": 2,
    "eq": 2, "ne": 2, "lt": 2, "le": 2, "gt": 2, "ge": 2,
    "mad": 3, "select": 3,
}

MAX_REGISTER = 4095

_IDENT = r"[A-Za-z_]\w*"
_LABEL_RE = re.compile(rf"^({_IDENT}):$")
_HEADER_RE = re.compile(rf"^kernel\s+({_IDENT})\s*\(([^)]*)\)$")
_REG_RE = re.compile(r"^r(\d+)$")
_IMM_RE = re.compile(r"^-?\d+$")
_MEMREF_RE = re.compile(rf"^buf\[({_IDENT})\]\[([^\]]+)\]$")
_WIDTH_RE = re.compile(r"^(\w+)\.x(\d+)$")


@dataclass(frozen=True)
class Reg:
    n: int


@dataclass(frozen=True)
class Imm:
    value: int


@dataclass(frozen=True)
class BuiltinRef:
    index: int  # into BUILTINS


Operand = Union[Reg, Imm, BuiltinRef]


@dataclass(frozen=True)
class Compute:
    opcode: str  # spelling as written, e.g. "fmul"
    base: str    # semantic name, e.g. "mul"
    width: int
    dst: Reg
    srcs: tuple[Operand, ...]
    line: int


@dataclass(frozen=True)
class Load:
    dst: Reg
    buffer: str
    index: Operand
    width: int
    atomic: bool
    line: int

    @property
    def opcode(self) -> str:
        return "aload" if self.atomic else "load"


@dataclass(frozen=True)
class Store:
    buffer: str
    index: Operand
    src: Operand
    width: int
    atomic: bool
    line: int

    @property
    def opcode(self) -> str:
        return "astore" if self.atomic else "store"


@dataclass(frozen=True)
class CondBr:
    cond: Operand
    then_label: str
    else_label: str
    line: int


@dataclass(frozen=True)
class Jump:
    label: str
    line: int


@dataclass(frozen=True)
class BarrierOp:
    line: int


@dataclass(frozen=True)
class Ret:
    line: int


Instr = Union[Compute, Load, Store, CondBr, Jump, BarrierOp, Ret]

TERMINATORS = (CondBr, Jump, Ret)


@dataclass
class BasicBlock:
    label: str
    instructions: list[Instr]


@dataclass
class KernelProgram:
    name: str
    params: tuple[str, ...]
    blocks: list[BasicBlock]
    num_registers: int

    @property
    def label_index(self) -> dict[str, int]:
        return {b.label: i for i, b in enumerate(self.blocks)}


def _strip(line: str) -> str:
    cut = line.find(";")
    if cut != -1:
        line = line[:cut]
    return line.strip()


def _parse_operand(token: str, line: int) -> Operand:
    token = token.strip()
    m = _REG_RE.match(token)
    if m:
        n = int(m.group(1))
        if n > MAX_REGISTER:
            raise ParseError(line, f"register index r{n} exceeds r{MAX_REGISTER}")
        return Reg(n)
    if token in _BUILTIN_INDEX:
        return BuiltinRef(_BUILTIN_INDEX[token])
    if _IMM_RE.match(token):
        return Imm(int(token))
    raise ParseError(line, f"bad operand {token!r}")


def _split_operands(rest: str, line: int) -> list[str]:
    # Split on commas that are not inside brackets (memory references).
    parts: list[str] = []
    depth = 0
    cur = []
    for ch in rest:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
            if depth < 0:
                raise ParseError(line, "unbalanced ']'")
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise ParseError(line, "unbalanced '['")
    last = "".join(cur).strip()
    if last or parts:
        parts.append(last)
    if any(not p for p in parts):
        raise ParseError(line, "empty operand")
    return parts


def _parse_memref(token: str, line: int, params: tuple[str, ...]) -> tuple[str, Operand]:
    m = _MEMREF_RE.match(token.strip())
    if not m:
        raise ParseError(line, f"bad memory reference {token!r} (expected buf[name][index])")
    name = m.group(1)
    if name not in params:
        raise ParseError(line, f"buffer {name!r} is not a kernel parameter")
    return name, _parse_operand(m.group(2), line)


def _parse_instruction(mnemonic: str, rest: str, line: int, params: tuple[str, ...]) -> Instr:
    width = 1
    m = _WIDTH_RE.match(mnemonic)
    if m:
        mnemonic, width = m.group(1), int(m.group(2))
        if width < 1:
            raise ParseError(line, "vector width must be >= 1")

    if mnemonic in ("br", "jmp", "barrier", "ret") and width != 1:
        raise ParseError(line, f"{mnemonic!r} takes no width suffix")

    if mnemonic == "ret":
        if rest:
            raise ParseError(line, "ret takes no operands")
        return Ret(line)
    if mnemonic == "barrier":
        if rest:
            raise ParseError(line, "barrier takes no operands")
        return BarrierOp(line)
    if mnemonic == "jmp":
        ops = _split_operands(rest, line)
        if len(ops) != 1 or not re.match(rf"^{_IDENT}$", ops[0]):
            raise ParseError(line, "jmp expects one label")
        return Jump(ops[0], line)
    if mnemonic == "br":
        ops = _split_operands(rest, line)
        if len(ops) != 3:
            raise ParseError(line, "br expects: cond, then_label, else_label")
        cond = _parse_operand(ops[0], line)
        for lbl in ops[1:]:
            if not re.match(rf"^{_IDENT}$", lbl):
                raise ParseError(line, f"bad label {lbl!r}")
        return CondBr(cond, ops[1], ops[2], line)

    if mnemonic in ("load", "aload"):
        ops = _split_operands(rest, line)
        if len(ops) != 2:
            raise ParseError(line, f"{mnemonic} expects: dst, buf[name][index]")
        dst = _parse_operand(ops[0], line)
        if not isinstance(dst, Reg):
            raise ParseError(line, f"{mnemonic} destination must be a register")
        buffer, index = _parse_memref(ops[1], line, params)
        return Load(dst, buffer, index, width, mnemonic == "aload", line)
    if mnemonic in ("store", "astore"):
        ops = _split_operands(rest, line)
        if len(ops) != 2:
            raise ParseError(line, f"{mnemonic} expects: buf[name][index], src")
        buffer, index = _parse_memref(ops[0], line, params)
        src = _parse_operand(ops[1], line)
        return Store(buffer, index, src, width, mnemonic == "astore", line)

    base = mnemonic
    if base not in OPCODE_ARITY and base.startswith("f") and base[1:] in OPCODE_ARITY:
        base = base[1:]
    if base not in OPCODE_ARITY:
        raise ParseError(line, f"unknown opcode {mnemonic!r}")
    arity = OPCODE_ARITY[base]
    ops = _split_operands(rest, line)
    if len(ops) != arity + 1:
        raise ParseError(line, f"{mnemonic} expects {arity + 1} operands, got {len(ops)}")
    dst = _parse_operand(ops[0], line)
    if not isinstance(dst, Reg):
        raise ParseError(line, f"{mnemonic} destination must be a register")
    srcs = tuple(_parse_operand(tok, line) for tok in ops[1:])
    return Compute(mnemonic, base, width, dst, srcs, line)


def _reads(instr: Instr) -> tuple[Operand, ...]:
    if isinstance(instr, Compute):
        return instr.srcs
    if isinstance(instr, Load):
        return (instr.index,)
    if isinstance(instr, Store):
        return (instr.index, instr.src)
    if isinstance(instr, CondBr):
        return (instr.cond,)
    return ()


def _writes(instr: Instr) -> Reg | None:
    if isinstance(instr, (Compute, Load)):
        return instr.dst
    return None


def parse_kernel(source: str) -> KernelProgram:
    """Parse kernel source text into a validated program."""
    name: str | None = None
    params: tuple[str, ...] = ()
    blocks: list[BasicBlock] = []
    current: BasicBlock | None = None

    for line_no, raw in enumerate(source.splitlines(), start=1):
        text = _strip(raw)
        if not text:
            continue

        if name is None:
            m = _HEADER_RE.match(text)
            if not m:
                raise ParseError(line_no, "expected kernel header: kernel name(param, ...)")
            name = m.group(1)
            arglist = m.group(2).strip()
            params = tuple(p.strip() for p in arglist.split(",")) if arglist else ()
            if any(not re.match(rf"^{_IDENT}$", p) for p in params):
                raise ParseError(line_no, "bad parameter name in kernel header")
            if len(set(params)) != len(params):
                raise ParseError(line_no, "duplicate parameter name")
            continue

        m = _LABEL_RE.match(text)
        if m:
            label = m.group(1)
            if any(b.label == label for b in blocks):
                raise ParseError(line_no, f"duplicate label {label!r}")
            current = BasicBlock(label, [])
            blocks.append(current)
            continue

        if current is None:
            raise ParseError(line_no, "instruction before the first label")
        if current.instructions and isinstance(current.instructions[-1], TERMINATORS):
            raise ParseError(line_no, f"unreachable code after terminator in block {current.label!r}")
        head, _, rest = text.partition(" ")
        current.instructions.append(_parse_instruction(head, rest.strip(), line_no, params))

    if name is None:
        raise ParseError(1, "empty kernel source")
    if not blocks:
        raise ParseError(1, "kernel has no blocks")

    labels = {b.label for b in blocks}
    last_lines = {}
    for block in blocks:
        if not block.instructions or not isinstance(block.instructions[-1], TERMINATORS):
            line = block.instructions[-1].line if block.instructions else 1
            raise MissingTerminator(line, f"block {block.label!r} does not end in br/jmp/ret")
        for instr in block.instructions:
            targets = ()
            if isinstance(instr, CondBr):
                targets = (instr.then_label, instr.else_label)
            elif isinstance(instr, Jump):
                targets = (instr.label,)
            for target in targets:
                if target not in labels:
                    raise UndefinedLabel(instr.line, f"undefined label {target!r}")
        last_lines[block.label] = block.instructions[-1].line

    # One textual pass: a register must be written on an earlier line than
    # any read.  Loop-carried registers therefore need an initializer
    # above the loop body, which is the discipline this IR expects.
    defined: set[int] = set()
    max_reg = -1
    for block in blocks:
        for instr in block.instructions:
            for op in _reads(instr):
                if isinstance(op, Reg):
                    if op.n not in defined:
                        raise UseBeforeDef(instr.line, f"register r{op.n} read before written")
                    max_reg = max(max_reg, op.n)
            dst = _writes(instr)
            if dst is not None:
                defined.add(dst.n)
                max_reg = max(max_reg, dst.n)

    return KernelProgram(name, params, blocks, max_reg + 1)
