"""Numeric kernels: histogram entropies, coverage counts, branch entropies.

All entropies use log base 2 and are reported in bits.  Histograms are
plain mappings from integer (or hashable) keys to positive counts.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import EmptyHistogram, InvalidSkip, NoBranches

DEFAULT_HISTORY_LEN = 16
SKIP_RANGE = range(1, 11)


def shannon_entropy(counts: Mapping[int, int]) -> float:
    """Shannon entropy of a frequency histogram, in bits."""
    values = np.fromiter(counts.values(), dtype=np.float64, count=len(counts))
    if values.size == 0:
        raise EmptyHistogram("histogram has no entries")
    if np.any(values <= 0):
        raise ValueError("histogram counts must be positive")
    total = values.sum()
    p = values / total
    return float(-(p * np.log2(p)).sum())


def local_entropy(counts: Mapping[int, int], bits_skipped: int) -> float:
    """Entropy of the histogram re-keyed by ``key >> bits_skipped``.

    Merging bins can only lower entropy, so the result is non-increasing
    in ``bits_skipped``.
    """
    if bits_skipped not in SKIP_RANGE:
        raise InvalidSkip(f"bits_skipped must be in 1..10, got {bits_skipped}")
    if not counts:
        raise EmptyHistogram("histogram has no entries")
    merged: dict[int, int] = {}
    for key, count in counts.items():
        shifted = key >> bits_skipped
        merged[shifted] = merged.get(shifted, 0) + count
    return shannon_entropy(merged)


def coverage_count(counts: Mapping, fraction: float | Fraction = 0.9) -> int:
    """Smallest number of most-frequent keys covering ``fraction`` of the total.

    Ties between equally frequent keys are broken by ascending key so the
    result is deterministic.  ``fraction`` given as a float is interpreted
    exactly through its shortest decimal form (0.9 means 9/10).
    """
    if not counts:
        raise EmptyHistogram("histogram has no entries")
    frac = Fraction(str(fraction)) if isinstance(fraction, float) else Fraction(fraction)
    total = sum(counts.values())
    threshold = frac * total
    cumulative = 0
    for k, (_, count) in enumerate(sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])), start=1):
        cumulative += count
        if cumulative >= threshold:
            return k
    return len(counts)


class BranchStats(NamedTuple):
    yokota: float
    linear: float
    observations: int
    excluded: int


def branch_entropy(
    records: Mapping[int, Sequence[int]],
    history_len: int = DEFAULT_HISTORY_LEN,
    linear_scale: float = 1.0,
) -> BranchStats:
    """Entropy of branch outcomes conditioned on per-site outcome history.

    Each site keeps its own running history; every execution after the
    first ``history_len`` of its site contributes one observation
    (pattern = the previous ``history_len`` outcomes, outcome = the
    current bit).  Observations are tallied in one table keyed by pattern
    value.  The Shannon score is the frequency-weighted binary entropy of
    the per-pattern taken probability and lies in [0, 1]; the linear
    score weights min(p, 1-p) instead and lies in [0, 0.5] (an ideal
    predictor keyed on the same history would miss that often).
    ``linear_scale`` rescales the linear score (pass 2.0 for the [0, 1]
    convention).

    Raises NoBranches when no site has enough executions to observe.
    """
    if not 1 <= history_len <= 24:
        raise ValueError("history_len must be in 1..24")
    size = 1 << history_len
    taken_tab = np.zeros(size, dtype=np.int64)
    total_tab = np.zeros(size, dtype=np.int64)
    excluded = 0
    for site in sorted(records):
        outcomes = np.asarray(records[site], dtype=np.uint32)
        if np.any(outcomes > 1):
            raise ValueError(f"site {site}: outcomes must be 0/1 bits")
        n = len(outcomes)
        if n <= history_len:
            excluded += n
            continue
        excluded += history_len
        m = n - history_len
        patterns = np.zeros(m, dtype=np.uint32)
        for k in range(history_len):
            patterns = (patterns << 1) | outcomes[k : k + m]
        observed = outcomes[history_len:]
        total_tab += np.bincount(patterns, minlength=size)
        taken_tab += np.bincount(patterns[observed == 1], minlength=size)

    observations = int(total_tab.sum())
    if observations == 0:
        raise NoBranches("no branch site has more than history_len executions")

    mask = total_tab > 0
    totals = total_tab[mask].astype(np.float64)
    p = taken_tab[mask] / totals
    q = 1.0 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
              + np.where(q > 0, q * np.log2(np.where(q > 0, q, 1.0)), 0.0))
    weights = totals / observations
    yokota = float((weights * h).sum())
    linear = float((weights * np.minimum(p, q)).sum()) * linear_scale
    return BranchStats(yokota, linear, observations, excluded)
