"""Readers for the published JSON files this tool consumes.

Deliberately standalone: the structures are re-validated here from their
documented shapes rather than imported from the analysis package, so the
plotter only ever depends on the files themselves.  Validation errors
carry the JSON path of the offending field.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass

KIVIAT_SCHEMA = "aiwc-kiviat/1"
REPORT_SCHEMA = "aiwc-report/1"

CATEGORIES = ("parallelism", "compute", "memory", "control")


class SchemaError(ValueError):
    """Input does not match its published schema; `path` names the field."""

    def __init__(self, path: str, reason: str):
        self.path = path
        super().__init__(f"{path}: {reason}")


@dataclass
class KiviatTable:
    metrics: list[tuple[str, str]]  # (name, category)
    kernel_ids: list[str]
    values: list[list[float]]


@dataclass
class LmaeProfile:
    kernel: str
    invocation: int
    levels: list[float]  # entropy at 1..10 skipped bits


def _load(fp_or_path) -> dict:
    if fp_or_path == "-":
        text = sys.stdin.read()
    elif hasattr(fp_or_path, "read"):
        text = fp_or_path.read()
    else:
        with open(fp_or_path, "r", encoding="utf-8") as fp:
            text = fp.read()
    try:
        obj = json.loads(text)
    except ValueError as exc:
        raise SchemaError("$", f"not valid JSON ({exc})") from None
    if not isinstance(obj, dict):
        raise SchemaError("$", "top level must be an object")
    return obj


def load_kiviat(fp_or_path) -> KiviatTable:
    obj = _load(fp_or_path)
    if obj.get("schema") != KIVIAT_SCHEMA:
        raise SchemaError(".schema", f"expected {KIVIAT_SCHEMA!r}, got {obj.get('schema')!r}")
    metrics_raw = obj.get("metrics")
    if not isinstance(metrics_raw, list) or not metrics_raw:
        raise SchemaError(".metrics", "must be a non-empty array")
    metrics: list[tuple[str, str]] = []
    for j, m in enumerate(metrics_raw):
        if not isinstance(m, dict) or not isinstance(m.get("name"), str):
            raise SchemaError(f".metrics[{j}].name", "must be a string")
        if m.get("category") not in CATEGORIES:
            raise SchemaError(f".metrics[{j}].category", f"must be one of {CATEGORIES}")
        metrics.append((m["name"], m["category"]))
    kernels_raw = obj.get("kernels")
    if not isinstance(kernels_raw, list):
        raise SchemaError(".kernels", "must be an array")
    if not kernels_raw:
        raise SchemaError(".kernels", "empty kernel list")
    ids: list[str] = []
    values: list[list[float]] = []
    for k, entry in enumerate(kernels_raw):
        if not isinstance(entry, dict) or not isinstance(entry.get("id"), str):
            raise SchemaError(f".kernels[{k}].id", "must be a string")
        row = entry.get("values")
        if not isinstance(row, list) or len(row) != len(metrics):
            raise SchemaError(
                f".kernels[{k}].values", f"must be an array of {len(metrics)} numbers"
            )
        for j, v in enumerate(row):
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise SchemaError(f".kernels[{k}].values[{j}]", "must be a number")
        ids.append(entry["id"])
        values.append([float(v) for v in row])
    return KiviatTable(metrics, ids, values)


def load_lmae_profiles(fp_or_path) -> list[LmaeProfile]:
    obj = _load(fp_or_path)
    if obj.get("schema") != REPORT_SCHEMA:
        raise SchemaError(".schema", f"expected {REPORT_SCHEMA!r}, got {obj.get('schema')!r}")
    kernel = obj.get("kernel")
    if not isinstance(kernel, str):
        raise SchemaError(".kernel", "must be a string")
    entries = obj.get("lmae_per_invocation")
    if not isinstance(entries, list) or not entries:
        raise SchemaError(
            ".lmae_per_invocation",
            "missing per-invocation locality profiles (re-run the analysis to produce them)",
        )
    profiles = []
    for k, entry in enumerate(entries):
        if not isinstance(entry, dict) or not isinstance(entry.get("invocation"), int):
            raise SchemaError(f".lmae_per_invocation[{k}].invocation", "must be an integer")
        levels = entry.get("lmae")
        if (
            not isinstance(levels, list)
            or len(levels) != 10
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in levels)
        ):
            raise SchemaError(f".lmae_per_invocation[{k}].lmae", "must be an array of 10 numbers")
        profiles.append(LmaeProfile(kernel, entry["invocation"], [float(v) for v in levels]))
    return profiles
