"""Synthetic inputs matching the published JSON schemas."""

from __future__ import annotations

import json

METRICS = (
    [
        ("granularity", "parallelism"),
        ("barriers_per_instruction", "parallelism"),
        ("load_imbalance", "parallelism"),
        ("instructions_per_operand", "parallelism"),
        ("opcode", "compute"),
        ("total_instruction_count", "compute"),
    ]
    + [
        (name, "memory")
        for name in (
            "total_memory_footprint", "footprint_90", "unique_reads", "unique_writes",
            "unique_rw_ratio", "total_reads", "total_writes", "reread_ratio",
            "rewrite_ratio", "gmae",
        )
    ]
    + [(f"lmae_skip{n}", "memory") for n in range(1, 11)]
    + [
        (name, "control")
        for name in ("total_unique_branch_instructions", "branch_90", "yokota_entropy", "linear_entropy")
    ]
)

KERNELS = ("diag", "inner", "perim")
SIZES = ("tiny", "small", "medium", "large")


def suite_table(kernels=KERNELS, sizes=SIZES) -> dict:
    """3 kernels x 4 sizes, deterministic values in [0, 1]."""
    rows = []
    for ki, name in enumerate(kernels):
        for si, size in enumerate(sizes):
            values = [((ki * 7 + si * 3 + j * 5) % 11) / 10.0 for j in range(len(METRICS))]
            rows.append({"id": f"{name}@{size}", "values": values})
    return {
        "schema": "aiwc-kiviat/1",
        "metrics": [{"name": n, "category": c} for n, c in METRICS],
        "kernels": rows,
        "maxima": [1.0] * len(METRICS),
        "degenerate": {},
    }


def flat_table(ids=("a", "b", "c")) -> dict:
    table = suite_table(kernels=("x",), sizes=("s",))
    table["kernels"] = [
        {"id": kid, "values": [(j + k) % 2 * 1.0 for j in range(len(METRICS))]}
        for k, kid in enumerate(ids)
    ]
    return table


def report_with_profiles(profiles, kernel="perimeter") -> dict:
    """Minimal report carrying per-invocation locality arrays."""
    return {
        "schema": "aiwc-report/1",
        "kernel": kernel,
        "invocations": [p["invocation"] for p in profiles],
        "lmae_per_invocation": profiles,
    }


def descending_profiles() -> list[dict]:
    out = []
    for invocation, start in enumerate((10.0, 9.0, 8.0, 7.0)):
        levels = [max(start - 0.8 * n, 0.0) for n in range(10)]
        out.append({"invocation": invocation, "lmae": levels})
    return out


def write_json(path, obj) -> str:
    path.write_text(json.dumps(obj, indent=1), encoding="utf-8")
    return str(path)
