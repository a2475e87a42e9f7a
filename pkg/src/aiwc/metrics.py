"""Single-pass metrics engine over trace streams.

`consume` folds a stream into a KernelAccumulator: opcode and address
histograms, per-site branch outcome strings, instructions-to-barrier and
instructions-per-thread samples, and vector-width tallies.  `finalize`
turns an accumulator into an AiwcReport.  Accumulators for invocations
of the same kernel can be merged before finalizing, which sums
histograms and concatenates sample lists so merged entropies are true
merged-stream entropies rather than averages.

A segment's instruction tally includes the barrier instruction that
closes it.  The final segment (closed by the work-item's end) is
recorded only when it executed at least one instruction; an empty
trailing segment is an artifact of a kernel returning straight after a
barrier and would skew the barrier-density arithmetic.

Branch outcome histories are kept per site and per work-group: each
group contributes its own outcome stream for a site, and the streams
are pooled pattern-by-pattern when entropies are computed.  Histories
therefore never span a group boundary, which keeps every report field
independent of the order in which groups executed.
"""

from __future__ import annotations

import math
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from . import entropy
from .errors import AiwcError, EmptySample, IncompatibleReports, InvalidStream, NoBranches, TraceTooLarge
from .report import AiwcReport, round12
from .trace import (
    Barrier,
    Branch,
    Instruction,
    KernelBegin,
    Memory,
    READ_OPS,
    StreamChecker,
    TraceEvent,
    WorkItemBegin,
    WorkItemEnd,
    WorkItemResume,
)

MEM_CAP_ENV = "AIWC_MEM_CAP_BYTES"
BYTES_PER_ENTRY = 64  # rough cost of one histogram entry / outcome bit
DEFAULT_MEM_CAP_BYTES = 1 << 30


def default_entry_cap() -> int:
    raw = os.environ.get(MEM_CAP_ENV)
    cap_bytes = int(raw) if raw else DEFAULT_MEM_CAP_BYTES
    return max(1, cap_bytes // BYTES_PER_ENTRY)


class _WorkItemTally:
    """Running ITB/IPT counters for one work-item."""

    __slots__ = ("segment", "total", "open")

    def __init__(self) -> None:
        self.segment = 0
        self.total = 0
        self.open = True


@dataclass
class KernelAccumulator:
    kernel_name: str
    invocations: list[int]
    launches: list[tuple[int, tuple[int, int, int], tuple[int, int, int]]]
    opcode_histogram: Counter = field(default_factory=Counter)
    read_addresses: Counter = field(default_factory=Counter)
    write_addresses: Counter = field(default_factory=Counter)
    # site -> outcome streams, one (group_key, bits) entry per group that
    # executed the site; streams stay separate across merges
    branch_records: dict[int, list[tuple[object, list[int]]]] = field(default_factory=dict)
    itb_samples: list[int] = field(default_factory=list)
    ipt_samples: list[int] = field(default_factory=list)
    simd_width_counts: Counter = field(default_factory=Counter)
    barriers_hit: int = 0
    work_items: int = 0
    total_instructions: int = 0
    # filled on merge: (invocation, lmae profile) per constituent run
    lmae_per_invocation: list[tuple[int, list[float]]] | None = None

    def branch_executions(self) -> dict[int, int]:
        return {
            site: sum(len(bits) for _, bits in streams)
            for site, streams in self.branch_records.items()
        }


def consume(events: Iterable[TraceEvent], *, max_entries: int | None = None) -> KernelAccumulator:
    """Fold a valid trace stream into an accumulator.

    Raises InvalidStream at the first stream-invariant violation and
    TraceTooLarge when histogram and branch-history state would exceed
    `max_entries` (default derived from AIWC_MEM_CAP_BYTES).
    """
    cap = default_entry_cap() if max_entries is None else max_entries
    checker = StreamChecker()
    violations = checker.violations

    acc: KernelAccumulator | None = None
    opcode_hist: Counter = Counter()
    read_addr: Counter = Counter()
    write_addr: Counter = Counter()
    branch_records: dict[int, list[tuple[object, list[int]]]] = {}
    itb_samples: list[int] = []
    ipt_samples: list[int] = []
    simd_counts: Counter = Counter()
    barriers_hit = 0
    work_items = 0
    total_instructions = 0
    entries = 0

    tallies: dict[tuple[int, int, int], _WorkItemTally] = {}
    current: _WorkItemTally | None = None

    for event in events:
        checker.feed(event)
        if violations:
            v = violations[0]
            raise InvalidStream(v.event_index, v.rule, v.detail)
        t = type(event)
        if t is Instruction:
            current.segment += 1
            current.total += 1
            total_instructions += 1
            opcode_hist[event.opcode] += 1
            simd_counts[event.width] += 1
        elif t is Memory:
            hist = read_addr if event.op in READ_OPS else write_addr
            addr = event.addr
            if addr not in hist:
                entries += 1
                if entries > cap:
                    raise TraceTooLarge(entries, cap)
            hist[addr] += 1
        elif t is Branch:
            streams = branch_records.get(event.site)
            if streams is None:
                streams = branch_records[event.site] = []
            group = checker.open_group
            if not streams or streams[-1][0] != group:
                streams.append((group, []))
            streams[-1][1].append(1 if event.taken else 0)
            entries += 1
            if entries > cap:
                raise TraceTooLarge(entries, cap)
        elif t is Barrier:
            barriers_hit += 1
            itb_samples.append(current.segment)
            current.segment = 0
            current.open = False
            current = None
        elif t is WorkItemBegin:
            work_items += 1
            current = _WorkItemTally()
            tallies[event.work_item.global_id] = current
        elif t is WorkItemResume:
            current = tallies[event.work_item.global_id]
            current.open = True
        elif t is WorkItemEnd:
            if current.segment > 0:
                itb_samples.append(current.segment)
            ipt_samples.append(current.total)
            current.open = False
            current = None
        elif t is KernelBegin:
            acc = KernelAccumulator(
                kernel_name=event.kernel_name,
                invocations=[event.invocation],
                launches=[(event.invocation, event.global_size, event.local_size)],
            )
    checker.finish()
    if violations:
        v = violations[0]
        raise InvalidStream(v.event_index, v.rule, v.detail)

    acc.opcode_histogram = opcode_hist
    acc.read_addresses = read_addr
    acc.write_addresses = write_addr
    acc.branch_records = branch_records
    acc.itb_samples = itb_samples
    acc.ipt_samples = ipt_samples
    acc.simd_width_counts = simd_counts
    acc.barriers_hit = barriers_hit
    acc.work_items = work_items
    acc.total_instructions = total_instructions
    return acc


class DistStats(NamedTuple):
    minimum: int
    maximum: int
    median: float
    mean: float
    sd: float


def summarize_distribution(samples: list[int]) -> DistStats:
    """Order statistics plus mean and population standard deviation.

    The median of an even-sized sample is the midpoint of the two
    central order statistics.
    """
    if not samples:
        raise EmptySample("cannot summarize an empty sample")
    ordered = sorted(samples)
    n = len(ordered)
    if n % 2:
        median = float(ordered[n // 2])
    else:
        median = (ordered[n // 2 - 1] + ordered[n // 2]) / 2.0
    mean = sum(ordered) / n
    variance = sum((x - mean) ** 2 for x in ordered) / n
    return DistStats(ordered[0], ordered[-1], median, mean, math.sqrt(variance))


def lmae_profile(acc: KernelAccumulator) -> list[float]:
    """Locality entropy at skip levels 1..10 over the merged access histogram."""
    merged = Counter(acc.read_addresses)
    merged.update(acc.write_addresses)
    if not merged:
        return [0.0] * 10
    return [round12(entropy.local_entropy(merged, n)) for n in entropy.SKIP_RANGE]


def merge_accumulators(
    parts: list[KernelAccumulator], *, allow_name_mismatch: bool = False
) -> KernelAccumulator:
    """Merge invocation accumulators into one application-level run.

    Histograms add and sample lists concatenate, so finalizing the merge
    is equivalent to having consumed one concatenated stream.  Kernel
    names must agree unless `allow_name_mismatch` (application rollups).
    """
    if not parts:
        raise EmptySample("nothing to merge")
    names = {p.kernel_name for p in parts}
    if len(names) > 1 and not allow_name_mismatch:
        raise IncompatibleReports(f"kernel names differ: {sorted(names)}")
    merged = KernelAccumulator(parts[0].kernel_name, [], [])
    per_invocation: list[tuple[int, list[float]]] = []
    for p in parts:
        merged.invocations.extend(p.invocations)
        merged.launches.extend(p.launches)
        merged.opcode_histogram.update(p.opcode_histogram)
        merged.read_addresses.update(p.read_addresses)
        merged.write_addresses.update(p.write_addresses)
        for site, streams in p.branch_records.items():
            merged.branch_records.setdefault(site, []).extend(streams)
        merged.itb_samples.extend(p.itb_samples)
        merged.ipt_samples.extend(p.ipt_samples)
        merged.simd_width_counts.update(p.simd_width_counts)
        merged.barriers_hit += p.barriers_hit
        merged.work_items += p.work_items
        merged.total_instructions += p.total_instructions
        if p.lmae_per_invocation is not None:
            per_invocation.extend(p.lmae_per_invocation)
        else:
            per_invocation.append((p.invocations[0], lmae_profile(p)))
    merged.lmae_per_invocation = per_invocation
    return merged


def finalize(acc: KernelAccumulator) -> AiwcReport:
    """Compute the full metric set from an accumulator."""
    total = acc.total_instructions
    if sum(acc.opcode_histogram.values()) != total:
        raise AiwcError("accumulator inconsistent: opcode counts != total instructions")
    if sum(acc.simd_width_counts.values()) != total:
        raise AiwcError("accumulator inconsistent: width samples != total instructions")
    if sum(acc.itb_samples) != total:
        raise AiwcError("accumulator inconsistent: ITB samples do not cover all instructions")
    if sum(acc.ipt_samples) != total:
        raise AiwcError("accumulator inconsistent: IPT samples do not cover all instructions")
    if len(acc.ipt_samples) != acc.work_items:
        raise AiwcError("accumulator inconsistent: one IPT sample per work-item expected")

    opcode_cov = entropy.coverage_count(acc.opcode_histogram, 0.9) if acc.opcode_histogram else 0

    if acc.itb_samples:
        itb = summarize_distribution(acc.itb_samples)
    else:
        itb = DistStats(0, 0, 0.0, 0.0, 0.0)
    if acc.ipt_samples:
        ipt = summarize_distribution(acc.ipt_samples)
    else:
        ipt = DistStats(0, 0, 0.0, 0.0, 0.0)

    width_total = sum(acc.simd_width_counts.values())
    if width_total:
        simd_sum = sum(w * c for w, c in acc.simd_width_counts.items())
        simd_mean = simd_sum / width_total
        simd_var = sum(c * (w - simd_mean) ** 2 for w, c in acc.simd_width_counts.items()) / width_total
        simd_max = max(acc.simd_width_counts)
        simd_sd = math.sqrt(simd_var)
    else:
        simd_sum, simd_mean, simd_sd, simd_max = 0, 0.0, 0.0, 0

    merged = Counter(acc.read_addresses)
    merged.update(acc.write_addresses)
    unique_reads = len(acc.read_addresses)
    unique_writes = len(acc.write_addresses)
    total_reads = sum(acc.read_addresses.values())
    total_writes = sum(acc.write_addresses.values())
    no_reads = total_reads == 0
    no_writes = total_writes == 0
    if merged:
        gmae = round12(entropy.shannon_entropy(merged))
        lmae = [round12(entropy.local_entropy(merged, n)) for n in entropy.SKIP_RANGE]
        footprint_90 = entropy.coverage_count(merged, 0.9)
    else:
        gmae, lmae, footprint_90 = 0.0, [0.0] * 10, 0

    site_hist = acc.branch_executions()
    executions = sum(site_hist.values())
    no_branches = executions == 0
    if no_branches:
        yokota, linear, warmup_fraction = 0.0, 0.0, 0.0
    else:
        streams = {
            (site, k): bits
            for site, site_streams in sorted(acc.branch_records.items())
            for k, (_, bits) in enumerate(site_streams)
        }
        try:
            stats = entropy.branch_entropy(streams)
            yokota, linear = round12(stats.yokota), round12(stats.linear)
            warmup_fraction = round12(stats.excluded / executions)
        except NoBranches:
            # every history stream is shorter than the warm-up length
            yokota, linear, warmup_fraction = 0.0, 0.0, 1.0
    branch_cov = entropy.coverage_count(site_hist, 0.9) if site_hist else 0

    if acc.lmae_per_invocation is not None:
        per_invocation = [{"invocation": inv, "lmae": prof} for inv, prof in acc.lmae_per_invocation]
    else:
        per_invocation = [{"invocation": acc.invocations[0], "lmae": list(lmae)}]

    return AiwcReport(
        kernel=acc.kernel_name,
        invocations=list(acc.invocations),
        opcode=opcode_cov,
        total_instruction_count=total,
        work_items=acc.work_items,
        total_barriers_hit=acc.barriers_hit,
        min_itb=itb.minimum,
        max_itb=itb.maximum,
        median_itb=round12(itb.median),
        min_ipt=ipt.minimum,
        max_ipt=ipt.maximum,
        median_ipt=round12(ipt.median),
        max_simd_width=simd_max,
        mean_simd_width=round12(simd_mean),
        sd_simd_width=round12(simd_sd),
        total_memory_footprint=len(merged),
        footprint_90=footprint_90,
        unique_reads=unique_reads,
        unique_writes=unique_writes,
        unique_rw_ratio=None if unique_writes == 0 else round12(unique_reads / unique_writes),
        total_reads=total_reads,
        total_writes=total_writes,
        reread_ratio=0.0 if no_reads else round12(unique_reads / total_reads),
        rewrite_ratio=0.0 if no_writes else round12(unique_writes / total_writes),
        gmae=gmae,
        lmae=lmae,
        total_unique_branch_instructions=len(acc.branch_records),
        branch_90=branch_cov,
        yokota_entropy=yokota,
        linear_entropy=linear,
        mean_itb=round12(itb.mean),
        simd_width_sum=simd_sum,
        no_branches=no_branches,
        warmup_excluded_fraction=warmup_fraction,
        no_reads=no_reads,
        no_writes=no_writes,
        lmae_per_invocation=per_invocation,
    )
