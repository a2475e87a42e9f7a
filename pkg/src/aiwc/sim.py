"""Deterministic NDRange interpreter for parsed kernel programs.

Work-groups execute one after another in lexicographic group-id order.
Inside a group, work-items run one at a time in lexicographic local-id
order: each runs until it hits a barrier (suspend) or returns, and once
every member waits at the barrier all are released in the same order.
The emitted event stream is therefore a pure function of the program and
launch configuration, byte-identical across runs.

Values are 64-bit lanes; element size for address generation is fixed at
4 bytes, so a width-w access at index i touches base + 4*(i+lane).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterator

from . import ir
from .errors import BarrierDivergence, ConfigError, OutOfBoundsAccess, SimulationError, StepLimitExceeded
from .trace import (
    Barrier,
    Branch,
    Instruction,
    KernelBegin,
    KernelEnd,
    Memory,
    TraceEvent,
    WorkGroupBegin,
    WorkGroupEnd,
    WorkItemBegin,
    WorkItemEnd,
    WorkItemId,
    WorkItemResume,
)

ELEMENT_BYTES = 4
BUFFER_ALIGN = 4096
DEFAULT_STEP_LIMIT = 10**8

_MASK = (1 << 64) - 1
_SIGN = 1 << 63


def _s(x: int) -> int:
    return x - (1 << 64) if x & _SIGN else x


def _sdiv(a: int, b: int) -> int:
    return 0 if b == 0 else _s(a) // _s(b)


def _srem(a: int, b: int) -> int:
    return 0 if b == 0 else _s(a) % _s(b)


SEMANTICS = {
    "mov": lambda a: a,
    "not": lambda a: ~a,
    "neg": lambda a: -_s(a),
    "abs": lambda a: abs(_s(a)),
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": _sdiv,
    "rem": _srem,
    "mod": _srem,
    "and": lambda a, b: a & b,
    "or": lambda a, b: a | b,
    "xor": lambda a, b: a ^ b,
    "shl": lambda a, b: a << (b & 63),
    "shr": lambda a, b: a >> (b & 63),
    "min": lambda a, b: min(_s(a), _s(b)),
    "max": lambda a, b: max(_s(a), _s(b)),
    "eq": lambda a, b: int(a == b),
    "ne": lambda a, b: int(a != b),
    "lt": lambda a, b: int(_s(a) < _s(b)),
    "le": lambda a, b: int(_s(a) <= _s(b)),
    "gt": lambda a, b: int(_s(a) > _s(b)),
    "ge": lambda a, b: int(_s(a) >= _s(b)),
    "mad": lambda a, b, c: a * b + c,
    "select": lambda c, a, b: a if c != 0 else b,
}


@dataclass
class NDRangeConfig:
    """Launch geometry plus named buffer contents.

    Buffer base addresses are normally assigned automatically (parameter
    order, 4096-byte aligned, disjoint); pass `bases` to pin them.
    """

    global_size: tuple[int, int, int]
    local_size: tuple[int, int, int]
    buffers: dict[str, list[int]] = field(default_factory=dict)
    bases: dict[str, int] | None = None

    def validate(self) -> None:
        for name, size in (("global_size", self.global_size), ("local_size", self.local_size)):
            if len(size) != 3 or any(not isinstance(x, int) or x < 1 for x in size):
                raise ConfigError(f"{name} must be three positive integers")
        for d in range(3):
            if self.global_size[d] % self.local_size[d] != 0:
                raise ConfigError(
                    f"local_size[{d}]={self.local_size[d]} does not divide "
                    f"global_size[{d}]={self.global_size[d]}"
                )
        if self.bases is not None:
            spans = []
            for name, values in self.buffers.items():
                if name not in self.bases:
                    raise ConfigError(f"no base address for buffer {name!r}")
                base = self.bases[name]
                end = base + ELEMENT_BYTES * len(values)
                if base < 0 or end > 1 << 64:
                    raise ConfigError(f"buffer {name!r} does not fit in the 64-bit address space")
                spans.append((base, end, name))
            spans.sort()
            for (_, end_a, name_a), (start_b, _, name_b) in zip(spans, spans[1:]):
                if start_b < end_a:
                    raise ConfigError(f"buffers {name_a!r} and {name_b!r} overlap")

    @property
    def work_item_count(self) -> int:
        gx, gy, gz = self.global_size
        return gx * gy * gz


def assign_bases(params: tuple[str, ...], buffers: dict[str, list[int]]) -> dict[str, int]:
    """Deterministic disjoint base addresses, in kernel-parameter order."""
    bases: dict[str, int] = {}
    next_base = BUFFER_ALIGN
    for name in params:
        bases[name] = next_base
        span = ELEMENT_BYTES * max(len(buffers.get(name, ())), 1)
        next_base += (span + BUFFER_ALIGN - 1) // BUFFER_ALIGN * BUFFER_ALIGN
    return bases


# compiled instruction kinds
_K_COMPUTE, _K_LOAD, _K_STORE, _K_BR, _K_JMP, _K_BARRIER, _K_RET = range(7)


def _operand_spec(op: ir.Operand):
    if isinstance(op, ir.Imm):
        return ("imm", op.value & _MASK)
    if isinstance(op, ir.BuiltinRef):
        return ("builtin", op.index)
    return ("reg", op.n)


class _WorkItemState:
    __slots__ = ("wi", "regs", "builtins", "block", "pc", "status", "begun", "barriers", "last_branch_line")

    READY, AT_BARRIER, DONE = range(3)

    def __init__(self, wi: WorkItemId, num_registers: int, builtins: tuple[int, ...]):
        self.wi = wi
        self.regs: list[list[int] | None] = [None] * num_registers
        self.builtins = builtins
        self.block = 0
        self.pc = 0
        self.status = self.READY
        self.begun = False
        self.barriers = 0
        self.last_branch_line: int | None = None


class _Machine:
    def __init__(self, program: ir.KernelProgram, cfg: NDRangeConfig, step_limit: int, invocation: int):
        cfg.validate()
        missing = [p for p in program.params if p not in cfg.buffers]
        if missing:
            raise ConfigError(f"kernel parameter {missing[0]!r} has no buffer")
        self.program = program
        self.cfg = cfg
        self.invocation = invocation
        self.steps_left = step_limit
        self.step_limit = step_limit
        self.bases = cfg.bases if cfg.bases is not None else assign_bases(program.params, cfg.buffers)
        self.buffers = {name: [v & _MASK for v in values] for name, values in cfg.buffers.items()}
        label_index = program.label_index
        self.code = [
            [self._compile(instr, label_index) for instr in block.instructions]
            for block in program.blocks
        ]

    def _compile(self, instr: ir.Instr, labels: dict[str, int]):
        if isinstance(instr, ir.Compute):
            fn = SEMANTICS[instr.base]
            getters = tuple(_operand_spec(op) for op in instr.srcs)
            return (_K_COMPUTE, instr.opcode, instr.width, instr.dst.n, fn, getters, instr.line)
        if isinstance(instr, ir.Load):
            op = "atomic_load" if instr.atomic else "load"
            return (_K_LOAD, instr.opcode, instr.width, instr.dst.n, instr.buffer,
                    _operand_spec(instr.index), op, instr.line)
        if isinstance(instr, ir.Store):
            op = "atomic_store" if instr.atomic else "store"
            return (_K_STORE, instr.opcode, instr.width, _operand_spec(instr.src), instr.buffer,
                    _operand_spec(instr.index), op, instr.line)
        if isinstance(instr, ir.CondBr):
            return (_K_BR, _operand_spec(instr.cond), labels[instr.then_label],
                    labels[instr.else_label], instr.line)
        if isinstance(instr, ir.Jump):
            return (_K_JMP, labels[instr.label])
        if isinstance(instr, ir.BarrierOp):
            return (_K_BARRIER,)
        return (_K_RET,)

    def _lanes(self, spec, st: _WorkItemState, width: int, line: int) -> list[int]:
        mode, payload = spec
        if mode == "reg":
            value = st.regs[payload]
            if len(value) == width:
                return value
            if len(value) == 1:
                return value * width
            raise SimulationError(
                f"line {line}: register r{payload} holds {len(value)} lanes, "
                f"but the instruction has width {width}",
                line,
            )
        if mode == "imm":
            return [payload] * width
        return [st.builtins[payload]] * width

    def _scalar(self, spec, st: _WorkItemState) -> int:
        mode, payload = spec
        if mode == "reg":
            return st.regs[payload][0]
        if mode == "imm":
            return payload
        return st.builtins[payload]

    def _charge(self, n: int = 1) -> None:
        self.steps_left -= n
        if self.steps_left < 0:
            raise StepLimitExceeded(self.step_limit)

    def run(self) -> Iterator[TraceEvent]:
        program, cfg = self.program, self.cfg
        yield KernelBegin(program.name, self.invocation, cfg.global_size, cfg.local_size)
        lsz = cfg.local_size
        n_groups = tuple(cfg.global_size[d] // lsz[d] for d in range(3))
        gsz = cfg.global_size
        for grp in product(range(n_groups[0]), range(n_groups[1]), range(n_groups[2])):
            yield WorkGroupBegin(grp)
            states = []
            for lid in product(range(lsz[0]), range(lsz[1]), range(lsz[2])):
                gid = tuple(grp[d] * lsz[d] + lid[d] for d in range(3))
                wi = WorkItemId(gid, lid, grp)
                builtins = gid + lid + grp + gsz + lsz
                states.append(_WorkItemState(wi, program.num_registers, builtins))
            while True:
                for st in states:
                    if st.status == _WorkItemState.READY:
                        yield from self._run_segment(st)
                if all(st.status == _WorkItemState.DONE for st in states):
                    break
                finished = [st for st in states if st.status == _WorkItemState.DONE]
                if finished:
                    waiting = next(st for st in states if st.status == _WorkItemState.AT_BARRIER)
                    culprit = finished[0]
                    at = (
                        f"after branching at line {culprit.last_branch_line}"
                        if culprit.last_branch_line is not None
                        else "without branching"
                    )
                    raise BarrierDivergence(
                        f"barrier divergence in group {grp}: work-item {culprit.wi.global_id} "
                        f"finished {at} while work-item {waiting.wi.global_id} waits at a barrier",
                        culprit.last_branch_line,
                    )
                for st in states:
                    st.status = _WorkItemState.READY
            yield WorkGroupEnd(grp)
        yield KernelEnd()

    def _run_segment(self, st: _WorkItemState) -> Iterator[TraceEvent]:
        if st.begun:
            yield WorkItemResume(st.wi)
        else:
            st.begun = True
            yield WorkItemBegin(st.wi)
        code = self.code
        while True:
            rec = code[st.block][st.pc]
            kind = rec[0]
            if kind == _K_COMPUTE:
                _, opcode, width, dst, fn, getters, line = rec
                self._charge()
                yield Instruction(opcode, width)
                args = [self._lanes(g, st, width, line) for g in getters]
                st.regs[dst] = [fn(*lanes) & _MASK for lanes in zip(*args)]
                st.pc += 1
            elif kind == _K_LOAD:
                _, opcode, width, dst, buffer, idx_spec, op, line = rec
                self._charge()
                yield Instruction(opcode, width)
                data = self.buffers[buffer]
                idx = _s(self._scalar(idx_spec, st))
                if idx < 0 or idx + width > len(data):
                    raise OutOfBoundsAccess(buffer, idx, line)
                base = self.bases[buffer] + ELEMENT_BYTES * idx
                for lane in range(width):
                    yield Memory(op, base + ELEMENT_BYTES * lane)
                st.regs[dst] = data[idx : idx + width]
                st.pc += 1
            elif kind == _K_STORE:
                _, opcode, width, src_spec, buffer, idx_spec, op, line = rec
                self._charge()
                yield Instruction(opcode, width)
                data = self.buffers[buffer]
                idx = _s(self._scalar(idx_spec, st))
                if idx < 0 or idx + width > len(data):
                    raise OutOfBoundsAccess(buffer, idx, line)
                base = self.bases[buffer] + ELEMENT_BYTES * idx
                lanes = self._lanes(src_spec, st, width, line)
                for lane in range(width):
                    yield Memory(op, base + ELEMENT_BYTES * lane)
                    data[idx + lane] = lanes[lane]
                st.pc += 1
            elif kind == _K_BR:
                _, cond_spec, then_idx, else_idx, line = rec
                self._charge()
                yield Instruction("br", 1)
                taken = self._scalar(cond_spec, st) != 0
                yield Branch(line, taken)
                st.last_branch_line = line
                st.block = then_idx if taken else else_idx
                st.pc = 0
            elif kind == _K_JMP:
                self._charge()
                yield Instruction("jmp", 1)
                st.block = rec[1]
                st.pc = 0
            elif kind == _K_BARRIER:
                self._charge()
                yield Instruction("barrier", 1)
                yield Barrier()
                st.barriers += 1
                st.status = _WorkItemState.AT_BARRIER
                st.pc += 1
                return
            else:  # _K_RET
                st.status = _WorkItemState.DONE
                yield WorkItemEnd(st.wi)
                return


def simulate_events(
    program: ir.KernelProgram,
    cfg: NDRangeConfig,
    *,
    step_limit: int = DEFAULT_STEP_LIMIT,
    invocation: int = 0,
) -> Iterator[TraceEvent]:
    """Stream the trace of one kernel invocation (lazy)."""
    return _Machine(program, cfg, step_limit, invocation).run()


def simulate(
    program: ir.KernelProgram,
    cfg: NDRangeConfig,
    *,
    step_limit: int = DEFAULT_STEP_LIMIT,
    invocation: int = 0,
) -> list[TraceEvent]:
    """Materialized variant of :func:`simulate_events`."""
    return list(simulate_events(program, cfg, step_limit=step_limit, invocation=invocation))
