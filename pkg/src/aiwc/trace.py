"""Execution-event model and the line-oriented `.aiwctrace` codec.

A trace stream is an ordered sequence of events: exactly one KernelBegin
first and one KernelEnd last, with properly nested work-group and
work-item lifecycles in between.  Work-items execute sequentially, so at
most one work-item segment (WorkItemBegin/WorkItemResume ... Barrier or
WorkItemEnd) is open at any point, and every Instruction/Branch/Memory/
Barrier event falls inside such a segment.

The on-disk format is UTF-8, one compact JSON object per line, LF line
endings, keys in a fixed order so that byte-equality of traces implies
event-equality.  Lines starting with `#` are comments.
"""

from __future__ import annotations

import json
from typing import IO, Iterable, Iterator, NamedTuple, Union

from .errors import MalformedEvent

Vec3 = tuple[int, int, int]

MEMORY_OPS = ("load", "store", "atomic_load", "atomic_store")
READ_OPS = frozenset(("load", "atomic_load"))
WRITE_OPS = frozenset(("store", "atomic_store"))

_ADDR_MAX = (1 << 64) - 1


class KernelBegin(NamedTuple):
    kernel_name: str
    invocation: int
    global_size: Vec3
    local_size: Vec3


class KernelEnd(NamedTuple):
    pass


class WorkGroupBegin(NamedTuple):
    group_id: Vec3


class WorkGroupEnd(NamedTuple):
    group_id: Vec3


class WorkItemId(NamedTuple):
    global_id: Vec3
    local_id: Vec3
    group_id: Vec3


class WorkItemBegin(NamedTuple):
    work_item: WorkItemId


class WorkItemResume(NamedTuple):
    work_item: WorkItemId


class WorkItemEnd(NamedTuple):
    work_item: WorkItemId


class Instruction(NamedTuple):
    opcode: str
    width: int


class Branch(NamedTuple):
    site: int
    taken: bool


class Memory(NamedTuple):
    op: str  # one of MEMORY_OPS
    addr: int


class Barrier(NamedTuple):
    pass


TraceEvent = Union[
    KernelBegin,
    KernelEnd,
    WorkGroupBegin,
    WorkGroupEnd,
    WorkItemBegin,
    WorkItemResume,
    WorkItemEnd,
    Instruction,
    Branch,
    Memory,
    Barrier,
]


def encode_event(event: TraceEvent) -> str:
    """Encode one event as its canonical single-line record."""
    t = type(event)
    if t is Instruction:
        obj = {"ev": "instr", "opcode": event.opcode, "width": event.width}
    elif t is Memory:
        obj = {"ev": "mem", "op": event.op, "addr": event.addr}
    elif t is Branch:
        obj = {"ev": "branch", "site": event.site, "taken": event.taken}
    elif t is Barrier:
        obj = {"ev": "barrier"}
    elif t is WorkItemBegin or t is WorkItemResume or t is WorkItemEnd:
        tag = {WorkItemBegin: "wi_begin", WorkItemResume: "wi_resume", WorkItemEnd: "wi_end"}[t]
        wi = event.work_item
        obj = {
            "ev": tag,
            "global": list(wi.global_id),
            "local": list(wi.local_id),
            "group": list(wi.group_id),
        }
    elif t is WorkGroupBegin:
        obj = {"ev": "wg_begin", "group": list(event.group_id)}
    elif t is WorkGroupEnd:
        obj = {"ev": "wg_end", "group": list(event.group_id)}
    elif t is KernelBegin:
        obj = {
            "ev": "kernel_begin",
            "kernel": event.kernel_name,
            "invocation": event.invocation,
            "global_size": list(event.global_size),
            "local_size": list(event.local_size),
        }
    elif t is KernelEnd:
        obj = {"ev": "kernel_end"}
    else:
        raise TypeError(f"not a trace event: {event!r}")
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


def _need(obj: dict, keys: tuple[str, ...], line_no: int | None) -> None:
    got = set(obj)
    want = set(keys) | {"ev"}
    missing = want - got
    if missing:
        raise MalformedEvent(f"missing field {sorted(missing)[0]!r}", line_no)
    extra = got - want
    if extra:
        raise MalformedEvent(f"unknown field {sorted(extra)[0]!r}", line_no)


def _uint(obj: dict, key: str, line_no: int | None, maximum: int | None = None) -> int:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise MalformedEvent(f"field {key!r} must be a non-negative integer", line_no)
    if maximum is not None and v > maximum:
        raise MalformedEvent(f"field {key!r} out of range", line_no)
    return v


def _vec3(obj: dict, key: str, line_no: int | None) -> Vec3:
    v = obj[key]
    if (
        not isinstance(v, list)
        or len(v) != 3
        or any(isinstance(x, bool) or not isinstance(x, int) or x < 0 for x in v)
    ):
        raise MalformedEvent(f"field {key!r} must be a 3-vector of non-negative integers", line_no)
    return (v[0], v[1], v[2])


def _work_item(obj: dict, line_no: int | None) -> WorkItemId:
    _need(obj, ("global", "local", "group"), line_no)
    return WorkItemId(_vec3(obj, "global", line_no), _vec3(obj, "local", line_no), _vec3(obj, "group", line_no))


def decode_event(line: str, line_no: int | None = None) -> TraceEvent:
    """Decode one trace line; inverse of :func:`encode_event` on its image."""
    try:
        obj = json.loads(line)
    except ValueError as exc:
        raise MalformedEvent(f"bad record syntax: {exc}", line_no) from None
    if not isinstance(obj, dict):
        raise MalformedEvent("record is not an object", line_no)
    tag = obj.get("ev")
    if not isinstance(tag, str):
        raise MalformedEvent("missing or non-string 'ev' tag", line_no)

    if tag == "instr":
        _need(obj, ("opcode", "width"), line_no)
        opcode = obj["opcode"]
        if not isinstance(opcode, str) or not opcode:
            raise MalformedEvent("field 'opcode' must be a non-empty string", line_no)
        width = _uint(obj, "width", line_no)
        if width == 0:
            raise MalformedEvent("field 'width' must be >= 1", line_no)
        return Instruction(opcode, width)
    if tag == "mem":
        _need(obj, ("op", "addr"), line_no)
        op = obj["op"]
        if op not in MEMORY_OPS:
            raise MalformedEvent(f"unknown memory op {op!r}", line_no)
        return Memory(op, _uint(obj, "addr", line_no, _ADDR_MAX))
    if tag == "branch":
        _need(obj, ("site", "taken"), line_no)
        taken = obj["taken"]
        if not isinstance(taken, bool):
            raise MalformedEvent("field 'taken' must be a boolean", line_no)
        return Branch(_uint(obj, "site", line_no), taken)
    if tag == "barrier":
        _need(obj, (), line_no)
        return Barrier()
    if tag == "wi_begin":
        return WorkItemBegin(_work_item(obj, line_no))
    if tag == "wi_resume":
        return WorkItemResume(_work_item(obj, line_no))
    if tag == "wi_end":
        return WorkItemEnd(_work_item(obj, line_no))
    if tag == "wg_begin":
        _need(obj, ("group",), line_no)
        return WorkGroupBegin(_vec3(obj, "group", line_no))
    if tag == "wg_end":
        _need(obj, ("group",), line_no)
        return WorkGroupEnd(_vec3(obj, "group", line_no))
    if tag == "kernel_begin":
        _need(obj, ("kernel", "invocation", "global_size", "local_size"), line_no)
        name = obj["kernel"]
        if not isinstance(name, str) or not name:
            raise MalformedEvent("field 'kernel' must be a non-empty string", line_no)
        gsz = _vec3(obj, "global_size", line_no)
        lsz = _vec3(obj, "local_size", line_no)
        if any(x < 1 for x in gsz) or any(x < 1 for x in lsz):
            raise MalformedEvent("launch sizes must be positive", line_no)
        return KernelBegin(name, _uint(obj, "invocation", line_no), gsz, lsz)
    if tag == "kernel_end":
        _need(obj, (), line_no)
        return KernelEnd()
    raise MalformedEvent(f"unknown event tag {tag!r}", line_no)


def write_trace(events: Iterable[TraceEvent], fp: IO[str]) -> None:
    """Write events as `.aiwctrace` lines to a text stream."""
    for event in events:
        fp.write(encode_event(event))
        fp.write("\n")


def iter_trace(fp: IO[str]) -> Iterator[TraceEvent]:
    """Yield events from a `.aiwctrace` text stream, skipping comments."""
    for line_no, raw in enumerate(fp, start=1):
        line = raw.rstrip("\n")
        if line.startswith("#"):
            continue
        if not line.strip():
            raise MalformedEvent("blank line", line_no)
        yield decode_event(line, line_no)


def read_trace(fp: IO[str]) -> list[TraceEvent]:
    return list(iter_trace(fp))


class Violation(NamedTuple):
    event_index: int
    rule: str
    detail: str


class ValidationReport(NamedTuple):
    violations: list[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations


# Rule identifiers used in violations.
RULE_KERNEL_BEGIN = "kernel_begin.first"
RULE_KERNEL_END = "kernel_end.last"
RULE_WG_NESTING = "wg.nesting"
RULE_WI_NESTING = "wi.nesting"
RULE_WI_ID = "wi.id_arithmetic"
RULE_OUTSIDE_SEGMENT = "event.outside_segment"
RULE_RESUME = "wi.resume_without_barrier"
RULE_BARRIER_DIVERGENCE = "barrier.divergence"
RULE_UNFINISHED = "wi.unfinished"


class StreamChecker:
    """Single-pass state machine over a stream; records invariant violations.

    Used both by validate_stream (collect everything) and by the metrics
    engine (fail on the first violation).  `open_segment` exposes the
    work-item whose segment is currently open, or None.
    """

    def __init__(self) -> None:
        self.violations: list[Violation] = []
        self.header: KernelBegin | None = None
        self.ended = False
        self.open_group: Vec3 | None = None
        self.open_segment: WorkItemId | None = None
        # per work-item global_id, within the open group:
        # status is "open" / "at_barrier" / "done"
        self.status: dict[Vec3, str] = {}
        self.barrier_counts: dict[Vec3, int] = {}
        self.index = -1

    def feed(self, event: TraceEvent) -> None:
        self.index += 1
        i = self.index
        t = type(event)
        flag = self.violations.append

        if self.ended:
            flag(Violation(i, RULE_KERNEL_END, "event after kernel_end"))
            return
        if self.header is None:
            if t is KernelBegin:
                self.header = event
                return
            flag(Violation(i, RULE_KERNEL_BEGIN, "first event must be kernel_begin"))
            self.header = KernelBegin("?", 0, (1, 1, 1), (1, 1, 1))

        # Metric events first: they dominate real streams.
        if t is Instruction or t is Memory or t is Branch:
            if self.open_segment is None:
                flag(Violation(i, RULE_OUTSIDE_SEGMENT, f"{t.__name__} outside a work-item segment"))
            return
        if t is Barrier:
            if self.open_segment is None:
                flag(Violation(i, RULE_OUTSIDE_SEGMENT, "Barrier outside a work-item segment"))
                return
            key = self.open_segment.global_id
            self.status[key] = "at_barrier"
            self.barrier_counts[key] = self.barrier_counts.get(key, 0) + 1
            self.open_segment = None
            return

        if t is KernelBegin:
            flag(Violation(i, RULE_KERNEL_BEGIN, "duplicate kernel_begin"))
            return
        if t is KernelEnd:
            if self.open_group is not None:
                flag(Violation(i, RULE_WG_NESTING, "kernel_end with open work-group"))
            self.ended = True
            return

        if t is WorkGroupBegin:
            if self.open_group is not None:
                flag(Violation(i, RULE_WG_NESTING, "wg_begin while another group is open"))
            self.open_group = event.group_id
            self.status = {}
            self.barrier_counts = {}
            return
        if t is WorkGroupEnd:
            if self.open_group is None or event.group_id != self.open_group:
                flag(Violation(i, RULE_WG_NESTING, "wg_end does not match open group"))
            if self.open_segment is not None:
                flag(Violation(i, RULE_WI_NESTING, "wg_end with open work-item segment"))
                self.open_segment = None
            unfinished = [g for g, s in self.status.items() if s != "done"]
            if unfinished:
                flag(Violation(i, RULE_UNFINISHED, f"work-item {unfinished[0]} never ended"))
            counts = set(self.barrier_counts.values())
            if len(counts) > 1:
                flag(Violation(
                    i, RULE_BARRIER_DIVERGENCE,
                    f"work-items of group {self.open_group} hit differing barrier counts {sorted(counts)}",
                ))
            self.open_group = None
            self.status = {}
            self.barrier_counts = {}
            return

        if t is WorkItemBegin or t is WorkItemResume or t is WorkItemEnd:
            wi = event.work_item
            if self.open_group is None:
                flag(Violation(i, RULE_WI_NESTING, "work-item event outside a work-group"))
                return
            if wi.group_id != self.open_group:
                flag(Violation(i, RULE_WI_NESTING, "work-item belongs to a different group"))
            self._check_id(i, wi)
            key = wi.global_id
            if t is WorkItemBegin:
                if self.open_segment is not None:
                    flag(Violation(i, RULE_WI_NESTING, "segment opened while another is open"))
                if key in self.status:
                    flag(Violation(i, RULE_WI_NESTING, "wi_begin for an already-started work-item"))
                self.status[key] = "open"
                self.barrier_counts.setdefault(key, 0)
                self.open_segment = wi
            elif t is WorkItemResume:
                if self.open_segment is not None:
                    flag(Violation(i, RULE_WI_NESTING, "segment opened while another is open"))
                if self.status.get(key) != "at_barrier":
                    flag(Violation(i, RULE_RESUME, "resume of a work-item not waiting at a barrier"))
                self.status[key] = "open"
                self.open_segment = wi
            else:  # WorkItemEnd
                if self.open_segment is None or self.open_segment.global_id != key:
                    flag(Violation(i, RULE_WI_NESTING, "wi_end without matching open segment"))
                else:
                    self.open_segment = None
                self.status[key] = "done"
            return

        raise TypeError(f"not a trace event: {event!r}")

    def _check_id(self, i: int, wi: WorkItemId) -> None:
        lsz = self.header.local_size if self.header else (1, 1, 1)
        for d in range(3):
            if wi.local_id[d] >= lsz[d]:
                self.violations.append(Violation(i, RULE_WI_ID, f"local_id[{d}] >= local_size[{d}]"))
                return
            if wi.global_id[d] != wi.group_id[d] * lsz[d] + wi.local_id[d]:
                self.violations.append(Violation(i, RULE_WI_ID, "global_id != group_id*local_size + local_id"))
                return

    def finish(self) -> None:
        if self.header is None:
            self.violations.append(Violation(0, RULE_KERNEL_BEGIN, "empty stream"))
        elif not self.ended:
            self.violations.append(Violation(max(self.index, 0), RULE_KERNEL_END, "stream has no kernel_end"))


def validate_stream(events: Iterable[TraceEvent]) -> ValidationReport:
    """Check a stream against every trace invariant.

    Violations are data, not failures: the report lists each offending
    event index with a rule identifier, and is empty for a valid stream.
    """
    checker = StreamChecker()
    for event in events:
        checker.feed(event)
    checker.finish()
    return ValidationReport(checker.violations)
