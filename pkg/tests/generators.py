"""Random well-formed trace streams for property and oracle tests."""

from __future__ import annotations

import random
from itertools import product

from aiwc.trace import (
    Barrier,
    Branch,
    Instruction,
    KernelBegin,
    KernelEnd,
    Memory,
    WorkGroupBegin,
    WorkGroupEnd,
    WorkItemBegin,
    WorkItemEnd,
    WorkItemId,
    WorkItemResume,
)

OPCODES = ["add", "fmul", "mad", "sub", "xor", "load", "store", "mov", "shl", "fdiv"]
MEM_OPS = ["load", "store", "atomic_load", "atomic_store"]


def random_events(rng: random.Random, max_events: int = 10_000, seg_cap: int = 20) -> list:
    """One valid stream: random geometry, segments, instructions, accesses."""
    local = (rng.randint(1, 4), rng.choice([1, 1, 1, 2]), 1)
    groups = (rng.randint(1, 3), rng.choice([1, 1, 2]), 1)
    gsz = tuple(groups[d] * local[d] for d in range(3))
    sections = rng.randint(0, 3)  # barriers per work-item
    name = rng.choice(["alpha", "beta", "gamma"])
    invocation = rng.randint(0, 5)

    # shared pools make reuse and ties likely
    addr_pool = [rng.randrange(0, 1 << rng.choice([8, 12, 20, 40, 64])) for _ in range(12)]
    site_pool = [rng.randint(1, 40) for _ in range(4)]

    n_items = gsz[0] * gsz[1] * gsz[2]
    budget_per_segment = max(1, max_events // max(1, n_items * (sections + 1)) - 4)

    events: list = [KernelBegin(name, invocation, gsz, local)]

    def segment_body() -> list:
        body: list = []
        for _ in range(rng.randint(0, min(budget_per_segment, seg_cap))):
            kind = rng.random()
            if kind < 0.55:
                body.append(Instruction(rng.choice(OPCODES), rng.choice([1, 1, 1, 2, 4, 8])))
            elif kind < 0.85:
                body.append(Instruction(rng.choice(["load", "store"]), 1))
                body.append(Memory(rng.choice(MEM_OPS), rng.choice(addr_pool)))
            else:
                body.append(Instruction("br", 1))
                body.append(Branch(rng.choice(site_pool), rng.random() < 0.6))
        return body

    for grp in product(range(groups[0]), range(groups[1]), range(groups[2])):
        events.append(WorkGroupBegin(grp))
        items = []
        for lid in product(range(local[0]), range(local[1]), range(local[2])):
            gid = tuple(grp[d] * local[d] + lid[d] for d in range(3))
            items.append(WorkItemId(gid, lid, grp))
        for section in range(sections + 1):
            for wi in items:
                events.append(WorkItemBegin(wi) if section == 0 else WorkItemResume(wi))
                events.extend(segment_body())
                if section < sections:
                    events.append(Instruction("barrier", 1))
                    events.append(Barrier())
                else:
                    events.append(WorkItemEnd(wi))
        events.append(WorkGroupEnd(grp))
    events.append(KernelEnd())
    return events


def random_event_objects(rng: random.Random, count: int = 200) -> list:
    """Standalone events of every variant, for codec round-trip tests."""
    out = []
    for _ in range(count):
        pick = rng.randrange(11)
        vec = lambda hi=8: (rng.randint(0, hi), rng.randint(0, hi), rng.randint(0, hi))
        if pick == 0:
            out.append(KernelBegin(rng.choice(["k", "nw_kernel", "kérnel-β"]), rng.randint(0, 99),
                                   (rng.randint(1, 64),) * 3, (rng.randint(1, 8),) * 3))
        elif pick == 1:
            out.append(KernelEnd())
        elif pick == 2:
            out.append(WorkGroupBegin(vec()))
        elif pick == 3:
            out.append(WorkGroupEnd(vec()))
        elif pick in (4, 5, 6):
            wi = WorkItemId(vec(1 << 20), vec(), vec())
            out.append({4: WorkItemBegin, 5: WorkItemResume, 6: WorkItemEnd}[pick](wi))
        elif pick == 7:
            out.append(Instruction(rng.choice(OPCODES), rng.choice([1, 2, 4, 16, 1024])))
        elif pick == 8:
            out.append(Branch(rng.randint(0, 10_000), rng.random() < 0.5))
        elif pick == 9:
            out.append(Memory(rng.choice(MEM_OPS), rng.choice([0, 1, 4096, (1 << 64) - 1])))
        else:
            out.append(Barrier())
    return out
