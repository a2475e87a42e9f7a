"""Report artifact: derived metrics, suite normalization, JSON/CSV output.

The report JSON is a single flat object with a frozen key order and all
reals rounded to 12 significant digits, so identical analyses produce
byte-identical files.  A ratio whose denominator is zero is serialized
as null next to an explanatory flag.  The CSV rendering is one header
row plus one data row in the same order, with the ten locality-entropy
values expanded to `lmae_skip1..lmae_skip10`.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, fields

from .errors import EmptySuite, SchemaError

REPORT_SCHEMA = "aiwc-report/1"
KIVIAT_SCHEMA = "aiwc-kiviat/1"


def round12(x: float) -> float:
    """Round to 12 significant digits (the serialization precision)."""
    return float(f"{x:.12g}")


@dataclass
class AiwcReport:
    """Finalized metrics for one kernel invocation (or a merged run)."""

    kernel: str
    invocations: list[int]
    # compute
    opcode: int
    total_instruction_count: int
    # parallelism
    work_items: int
    total_barriers_hit: int
    min_itb: int
    max_itb: int
    median_itb: float
    min_ipt: int
    max_ipt: int
    median_ipt: float
    max_simd_width: int
    mean_simd_width: float
    sd_simd_width: float
    # memory
    total_memory_footprint: int
    footprint_90: int
    unique_reads: int
    unique_writes: int
    unique_rw_ratio: float | None
    total_reads: int
    total_writes: int
    reread_ratio: float
    rewrite_ratio: float
    gmae: float
    lmae: list[float]
    # control
    total_unique_branch_instructions: int
    branch_90: int
    yokota_entropy: float
    linear_entropy: float
    # auxiliary
    mean_itb: float
    simd_width_sum: int
    # flags
    no_branches: bool
    warmup_excluded_fraction: float
    no_reads: bool
    no_writes: bool
    # per-invocation locality profiles, kept across merges
    lmae_per_invocation: list[dict] = field(default_factory=list)


@dataclass
class DerivedMetrics:
    granularity: float
    barriers_per_instruction: float
    instructions_per_operand: float
    load_imbalance: int


def derive(report: AiwcReport) -> DerivedMetrics:
    """Inverted parallelism metrics and load imbalance.

    Degenerate inputs (no work-items, no instructions) yield 0.0 rather
    than an error; the corresponding report fields make the situation
    visible.
    """
    granularity = 1.0 / report.work_items if report.work_items > 0 else 0.0
    bpi = 1.0 / report.mean_itb if report.mean_itb > 0 else 0.0
    ipo = 1.0 / report.simd_width_sum if report.simd_width_sum > 0 else 0.0
    return DerivedMetrics(
        granularity=round12(granularity),
        barriers_per_instruction=round12(bpi),
        instructions_per_operand=round12(ipo),
        load_imbalance=report.max_ipt - report.min_ipt,
    )


_DERIVED_KEYS = ("granularity", "barriers_per_instruction", "instructions_per_operand", "load_imbalance")


def report_to_dict(report: AiwcReport, derived: DerivedMetrics | None = None) -> dict:
    out: dict = {"schema": REPORT_SCHEMA}
    for f in fields(AiwcReport):
        out[f.name] = getattr(report, f.name)
    if derived is None:
        derived = derive(report)
    for key in _DERIVED_KEYS:
        out[key] = getattr(derived, key)
    return out


def report_from_dict(obj: dict) -> AiwcReport:
    if not isinstance(obj, dict):
        raise SchemaError("report must be a JSON object")
    schema = obj.get("schema")
    if schema != REPORT_SCHEMA:
        raise SchemaError(f"expected schema {REPORT_SCHEMA!r}, got {schema!r}")
    kwargs = {}
    for f in fields(AiwcReport):
        if f.name not in obj:
            raise SchemaError(f"report is missing field {f.name!r}")
        kwargs[f.name] = obj[f.name]
    return AiwcReport(**kwargs)


CSV_COLUMNS = (
    ["kernel", "invocations"]
    + ["opcode", "total_instruction_count"]
    + [
        "work_items", "total_barriers_hit",
        "min_itb", "max_itb", "median_itb",
        "min_ipt", "max_ipt", "median_ipt",
        "max_simd_width", "mean_simd_width", "sd_simd_width",
    ]
    + [
        "total_memory_footprint", "footprint_90",
        "unique_reads", "unique_writes", "unique_rw_ratio",
        "total_reads", "total_writes", "reread_ratio", "rewrite_ratio",
        "gmae",
    ]
    + [f"lmae_skip{n}" for n in range(1, 11)]
    + ["total_unique_branch_instructions", "branch_90", "yokota_entropy", "linear_entropy"]
    + ["mean_itb", "simd_width_sum"]
    + list(_DERIVED_KEYS)
    + ["no_branches", "warmup_excluded_fraction", "no_reads", "no_writes"]
)


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def emit_report(report: AiwcReport, derived: DerivedMetrics | None = None, format: str = "json") -> bytes:
    """Render a report (plus derived metrics) as JSON or CSV bytes."""
    if derived is None:
        derived = derive(report)
    if format == "json":
        text = json.dumps(report_to_dict(report, derived), indent=2, ensure_ascii=False)
        return (text + "\n").encode("utf-8")
    if format == "csv":
        flat = report_to_dict(report, derived)
        flat["invocations"] = ";".join(str(i) for i in report.invocations)
        for n in range(1, 11):
            flat[f"lmae_skip{n}"] = report.lmae[n - 1]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerow([_csv_cell(flat[col]) for col in CSV_COLUMNS])
        return buf.getvalue().encode("utf-8")
    raise ValueError(f"unknown report format {format!r}")


def load_report(fp) -> AiwcReport:
    try:
        obj = json.load(fp)
    except ValueError as exc:
        raise SchemaError(f"bad report JSON: {exc}") from None
    return report_from_dict(obj)


# Kiviat spokes: (name, category), frozen so plots are comparable across
# runs.  Parallelism spokes carry the derived/inverted values.
KIVIAT_METRICS: list[tuple[str, str]] = (
    [
        ("granularity", "parallelism"),
        ("barriers_per_instruction", "parallelism"),
        ("load_imbalance", "parallelism"),
        ("instructions_per_operand", "parallelism"),
        ("opcode", "compute"),
        ("total_instruction_count", "compute"),
        ("total_memory_footprint", "memory"),
        ("footprint_90", "memory"),
        ("unique_reads", "memory"),
        ("unique_writes", "memory"),
        ("unique_rw_ratio", "memory"),
        ("total_reads", "memory"),
        ("total_writes", "memory"),
        ("reread_ratio", "memory"),
        ("rewrite_ratio", "memory"),
        ("gmae", "memory"),
    ]
    + [(f"lmae_skip{n}", "memory") for n in range(1, 11)]
    + [
        ("total_unique_branch_instructions", "control"),
        ("branch_90", "control"),
        ("yokota_entropy", "control"),
        ("linear_entropy", "control"),
    ]
)


@dataclass
class KiviatTable:
    metrics: list[tuple[str, str]]  # (name, category)
    kernel_ids: list[str]
    values: list[list[float]]  # one row per kernel, [0, 1]
    maxima: list[float]  # suite maximum per metric (finite part)
    degenerate: dict[str, str]  # metric name -> reason

    def to_dict(self) -> dict:
        return {
            "schema": KIVIAT_SCHEMA,
            "metrics": [{"name": n, "category": c} for n, c in self.metrics],
            "kernels": [
                {"id": kid, "values": row} for kid, row in zip(self.kernel_ids, self.values)
            ],
            "maxima": self.maxima,
            "degenerate": self.degenerate,
        }

    def to_json(self) -> bytes:
        return (json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def kiviat_from_dict(obj: dict) -> KiviatTable:
    if not isinstance(obj, dict) or obj.get("schema") != KIVIAT_SCHEMA:
        raise SchemaError(f"expected schema {KIVIAT_SCHEMA!r}")
    try:
        metrics = [(m["name"], m["category"]) for m in obj["metrics"]]
        ids = [k["id"] for k in obj["kernels"]]
        values = [list(k["values"]) for k in obj["kernels"]]
        maxima = list(obj["maxima"])
        degenerate = dict(obj.get("degenerate", {}))
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad comparison table: {exc!r}") from None
    for kid, row in zip(ids, values):
        if len(row) != len(metrics):
            raise SchemaError(f"kernel {kid!r} has {len(row)} values for {len(metrics)} metrics")
    return KiviatTable(metrics, ids, values, maxima, degenerate)


def _raw_spoke_value(name: str, report: AiwcReport, derived: DerivedMetrics) -> float:
    if name in _DERIVED_KEYS:
        return float(getattr(derived, name))
    if name.startswith("lmae_skip"):
        return report.lmae[int(name[len("lmae_skip"):]) - 1]
    value = getattr(report, name)
    if value is None:  # unique_rw_ratio with no writes
        return math.inf
    return float(value)


def normalize_suite(entries: list[tuple[str, AiwcReport, DerivedMetrics]]) -> KiviatTable:
    """Normalize a suite of reports to [0, 1] per metric.

    Each spoke is divided by the suite-wide maximum; a metric whose
    maximum is zero maps every kernel to 0 and is flagged, and infinite
    ratios pin to 1.0 with a flag.
    """
    if not entries:
        raise EmptySuite("need at least one report to normalize")
    names = [name for name, _ in KIVIAT_METRICS]
    raw = [
        [_raw_spoke_value(name, report, derived) for name in names]
        for _, report, derived in entries
    ]
    maxima: list[float] = []
    degenerate: dict[str, str] = {}
    for j, name in enumerate(names):
        column = [row[j] for row in raw]
        finite = [v for v in column if math.isfinite(v)]
        peak = max(finite) if finite else 0.0
        maxima.append(round12(peak))
        if any(math.isinf(v) for v in column):
            degenerate[name] = "infinite_values"
        elif peak == 0.0:
            degenerate[name] = "zero_maximum"
    values = []
    for row in raw:
        out_row = []
        for j, v in enumerate(row):
            if math.isinf(v):
                out_row.append(1.0)
            elif maxima[j] == 0.0:
                out_row.append(0.0)
            else:
                out_row.append(round12(v / maxima[j]))
        values.append(out_row)
    return KiviatTable(list(KIVIAT_METRICS), [e[0] for e in entries], values, maxima, degenerate)
