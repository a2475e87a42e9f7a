"""Naive two-pass reference metrics, independent of the engine under test.

Everything here is recomputed from a materialized event list with
straightforward sort-and-count code: no shared histogram helpers, no
numpy, no streaming.  Used to cross-check every report field.
"""

from __future__ import annotations

import math

from aiwc.trace import (
    Barrier,
    Branch,
    Instruction,
    KernelBegin,
    Memory,
    WorkGroupBegin,
    WorkItemBegin,
    WorkItemEnd,
    WorkItemResume,
)

HISTORY = 16


def _entropy_of_values(values: list[int]) -> float:
    if not values:
        return 0.0
    ordered = sorted(values)
    total = len(ordered)
    result = 0.0
    run = 1
    for prev, cur in zip(ordered, ordered[1:]):
        if cur == prev:
            run += 1
        else:
            p = run / total
            result -= p * math.log2(p)
            run = 1
    p = run / total
    result -= p * math.log2(p)
    return result


def _coverage(items: list, fraction_num: int = 9, fraction_den: int = 10) -> int:
    if not items:
        return 0
    counts: dict = {}
    for item in items:
        counts[item] = counts.get(item, 0) + 1
    order = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    total = len(items)
    cum = 0
    for k, (_, c) in enumerate(order, start=1):
        cum += c
        if cum * fraction_den >= fraction_num * total:
            return k
    return len(order)


def _median(samples: list[int]) -> float:
    ordered = sorted(samples)
    n = len(ordered)
    if n == 0:
        return 0.0
    if n % 2:
        return float(ordered[n // 2])
    return (ordered[n // 2 - 1] + ordered[n // 2]) / 2.0


def _mean_sd(samples: list) -> tuple[float, float]:
    if not samples:
        return 0.0, 0.0
    mean = sum(samples) / len(samples)
    var = sum((x - mean) ** 2 for x in samples) / len(samples)
    return mean, math.sqrt(var)


def _branch_tables(streams: list[list[int]]) -> tuple[float, float, int, int]:
    table: dict[int, list[int]] = {}
    excluded = 0
    for outcomes in streams:
        if len(outcomes) <= HISTORY:
            excluded += len(outcomes)
            continue
        excluded += HISTORY
        for t in range(HISTORY, len(outcomes)):
            pattern = 0
            for bit in outcomes[t - HISTORY : t]:
                pattern = (pattern << 1) | bit
            slot = table.setdefault(pattern, [0, 0])
            slot[0] += outcomes[t]
            slot[1] += 1
    observations = sum(total for _, total in table.values())
    if observations == 0:
        return 0.0, 0.0, 0, excluded
    yokota = 0.0
    linear = 0.0
    for taken, total in table.values():
        p = taken / total
        q = 1.0 - p
        h = 0.0
        if p > 0:
            h -= p * math.log2(p)
        if q > 0:
            h -= q * math.log2(q)
        weight = total / observations
        yokota += weight * h
        linear += weight * min(p, q)
    return yokota, linear, observations, excluded


def compute_reference(events: list) -> dict:
    """Recompute the full metric set from an event list."""
    header = events[0]
    assert isinstance(header, KernelBegin)

    opcodes: list[str] = []
    widths: list[int] = []
    reads: list[int] = []
    writes: list[int] = []
    # one outcome stream per (site, work-group), histories never span groups
    branch_streams: dict[tuple[int, tuple], list[int]] = {}
    itb: list[int] = []
    ipt: list[int] = []
    barriers = 0
    work_items = 0

    seg_count = 0
    total_count = 0
    per_item_totals: dict = {}
    open_item = None
    current_group = None

    for event in events:
        if isinstance(event, Instruction):
            opcodes.append(event.opcode)
            widths.append(event.width)
            seg_count += 1
        elif isinstance(event, Memory):
            if event.op in ("load", "atomic_load"):
                reads.append(event.addr)
            else:
                writes.append(event.addr)
        elif isinstance(event, Branch):
            key = (event.site, current_group)
            branch_streams.setdefault(key, []).append(1 if event.taken else 0)
        elif isinstance(event, WorkGroupBegin):
            current_group = event.group_id
        elif isinstance(event, Barrier):
            barriers += 1
            itb.append(seg_count)
            per_item_totals[open_item] = per_item_totals.get(open_item, 0) + seg_count
            seg_count = 0
            open_item = None
        elif isinstance(event, WorkItemBegin):
            work_items += 1
            open_item = event.work_item.global_id
            per_item_totals.setdefault(open_item, 0)
            seg_count = 0
        elif isinstance(event, WorkItemResume):
            open_item = event.work_item.global_id
            seg_count = 0
        elif isinstance(event, WorkItemEnd):
            if seg_count > 0:
                itb.append(seg_count)
            per_item_totals[open_item] = per_item_totals.get(open_item, 0) + seg_count
            ipt.append(per_item_totals[open_item])
            seg_count = 0
            open_item = None
    total_count = len(opcodes)

    combined = reads + writes
    unique_reads = len(set(reads))
    unique_writes = len(set(writes))
    itb_mean, _ = _mean_sd(itb)
    width_mean, width_sd = _mean_sd(widths)
    yokota, linear, _, excluded = _branch_tables(list(branch_streams.values()))
    executions = sum(len(v) for v in branch_streams.values())

    sites = {site for site, _ in branch_streams}
    site_occurrences = [site for (site, _), v in branch_streams.items() for _ in v]

    lmae = []
    for skip in range(1, 11):
        lmae.append(_entropy_of_values([a >> skip for a in combined]))

    return {
        "kernel": header.kernel_name,
        "invocations": [header.invocation],
        "opcode": _coverage(opcodes),
        "total_instruction_count": total_count,
        "work_items": work_items,
        "total_barriers_hit": barriers,
        "min_itb": min(itb) if itb else 0,
        "max_itb": max(itb) if itb else 0,
        "median_itb": _median(itb),
        "min_ipt": min(ipt) if ipt else 0,
        "max_ipt": max(ipt) if ipt else 0,
        "median_ipt": _median(ipt),
        "max_simd_width": max(widths) if widths else 0,
        "mean_simd_width": width_mean,
        "sd_simd_width": width_sd,
        "total_memory_footprint": len(set(combined)),
        "footprint_90": _coverage(combined),
        "unique_reads": unique_reads,
        "unique_writes": unique_writes,
        "unique_rw_ratio": None if unique_writes == 0 else unique_reads / unique_writes,
        "total_reads": len(reads),
        "total_writes": len(writes),
        "reread_ratio": 0.0 if not reads else unique_reads / len(reads),
        "rewrite_ratio": 0.0 if not writes else unique_writes / len(writes),
        "gmae": _entropy_of_values(combined),
        "lmae": lmae,
        "total_unique_branch_instructions": len(sites),
        "branch_90": _coverage(site_occurrences),
        "yokota_entropy": yokota,
        "linear_entropy": linear,
        "mean_itb": itb_mean,
        "simd_width_sum": sum(widths),
        "no_branches": executions == 0,
        "warmup_excluded_fraction": excluded / executions if executions else 0.0,
        "no_reads": not reads,
        "no_writes": not writes,
    }
