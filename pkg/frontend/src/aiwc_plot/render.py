"""Figure construction: category-colored radar charts and locality descent lines.

Rendering is deterministic: a fixed svg hash salt, no embedded dates, and
stable artist ordering, so identical inputs produce byte-identical SVG.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .schema import KiviatTable, LmaeProfile  # noqa: E402

CATEGORY_COLORS = {
    "parallelism": "#2ca02c",  # green
    "compute": "#1f77b4",      # blue
    "memory": "#f5deb3",       # beige
    "control": "#9467bd",      # purple
}

SERIES_COLORS = [
    "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]

matplotlib.rcParams["svg.hashsalt"] = "aiwc-plot"
matplotlib.rcParams["svg.fonttype"] = "none"  # keep labels as text nodes


@dataclass
class PlotSpec:
    inputs: list[str]
    output: str | None = None
    out_dir: str | None = None
    image_format: str = "svg"
    split: str = "@"
    size: tuple[float, float] = (7.0, 6.0)
    dpi: int = 100
    metadata: dict = field(default_factory=dict)


def group_overlays(table: KiviatTable, split: str) -> list[tuple[str, list[tuple[str, list[float]]]]]:
    """Group kernel rows into figures.

    When every id contains the split character, ids are `figure@overlay`
    and each prefix becomes one figure with its suffixes overlaid.
    Otherwise all kernels share a single figure.
    """
    rows = list(zip(table.kernel_ids, table.values))
    if split and all(split in kid for kid in table.kernel_ids):
        grouped: dict[str, list[tuple[str, list[float]]]] = {}
        order: list[str] = []
        for kid, row in rows:
            key, label = kid.rsplit(split, 1)
            if key not in grouped:
                grouped[key] = []
                order.append(key)
            grouped[key].append((label, row))
        return [(key, grouped[key]) for key in order]
    return [("all", rows)]


def render_kiviat(table: KiviatTable, entries: list[tuple[str, list[float]]], title: str, spec: PlotSpec):
    """One radar figure: category bands, one clipped polygon per entry."""
    n = len(table.metrics)
    theta = 2.0 * np.pi * np.arange(n) / n
    fig = plt.figure(figsize=spec.size)
    ax = fig.add_subplot(111, projection="polar")
    ax.set_theta_offset(np.pi / 2.0)
    ax.set_theta_direction(-1)
    ax.set_ylim(0.0, 1.05)

    # translucent wedge per contiguous category run
    half = np.pi / n
    start = 0
    categories = [c for _, c in table.metrics]
    for j in range(1, n + 1):
        if j == n or categories[j] != categories[start]:
            a = theta[start] - half
            b = theta[j - 1] + half
            sweep = np.linspace(a, b, 64)
            ax.fill_between(sweep, 0.0, 1.05, color=CATEGORY_COLORS[categories[start]],
                            alpha=0.18, zorder=0.5, linewidth=0)
            start = j

    closed_theta = np.concatenate([theta, theta[:1]])
    for k, (label, row) in enumerate(entries):
        values = np.clip(np.asarray(row, dtype=float), 0.0, 1.0)
        closed = np.concatenate([values, values[:1]])
        color = SERIES_COLORS[k % len(SERIES_COLORS)]
        ax.plot(closed_theta, closed, color=color, linewidth=1.4, label=label, zorder=3)
        ax.fill(closed_theta, closed, color=color, alpha=0.10, zorder=2)

    ax.set_xticks(theta)
    ax.set_xticklabels([name for name, _ in table.metrics], fontsize=5.5)
    ax.set_yticks([0.25, 0.5, 0.75, 1.0])
    ax.set_yticklabels(["0.25", "0.5", "0.75", "1"], fontsize=6)
    ax.tick_params(pad=1)
    ax.set_title(title, fontsize=11, pad=18)
    ax.legend(loc="upper right", bbox_to_anchor=(1.28, 1.12), fontsize=7, framealpha=0.9)
    return fig


def render_lmae(profiles: list[LmaeProfile], title: str, spec: PlotSpec):
    """Locality entropy against skipped low bits, one line per invocation."""
    fig = plt.figure(figsize=spec.size)
    ax = fig.add_subplot(111)
    skips = np.arange(1, 11)
    many_kernels = len({p.kernel for p in profiles}) > 1
    for k, profile in enumerate(profiles):
        label = (
            f"{profile.kernel} invocation {profile.invocation}"
            if many_kernels
            else f"invocation {profile.invocation}"
        )
        ax.plot(skips, profile.levels, marker="o", markersize=3.5,
                color=SERIES_COLORS[k % len(SERIES_COLORS)], linewidth=1.4, label=label)
    ax.set_xticks(skips)
    ax.set_xlabel("address bits skipped")
    ax.set_ylabel("entropy (bits)")
    ax.set_ylim(bottom=0.0)
    ax.grid(True, linewidth=0.4, alpha=0.5)
    ax.set_title(title, fontsize=11)
    ax.legend(fontsize=7)
    fig.tight_layout()
    return fig


def save_figure(fig, path: str, spec: PlotSpec) -> None:
    if spec.image_format == "svg":
        # a pinned hash salt plus no date stamp keeps the bytes reproducible
        fig.savefig(path, format="svg", metadata={"Date": None})
    elif spec.image_format == "png":
        fig.savefig(path, format="png", dpi=spec.dpi)
    else:
        raise ValueError(f"unknown image format {spec.image_format!r}")
    plt.close(fig)
