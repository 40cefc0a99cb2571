"""Headless figure rendering for score and correlation reports.

Each function takes a report dictionary (the JSON payloads written by the
score and correlate commands) and returns PNG bytes keyed by output path,
so the caller can stage everything through the same atomic writer as the
delimited files.
"""

from __future__ import annotations

import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

_SIG_NOTE = "* p < 0.05   ** p < 0.01 (two-tailed)"


def _png(fig) -> bytes:
    buffer = io.BytesIO()
    fig.savefig(buffer, format="png", dpi=150, bbox_inches="tight")
    plt.close(fig)
    return buffer.getvalue()


def _stars(cell: dict | None) -> str:
    if cell is None:
        return ""
    if cell["sig_001"]:
        return "**"
    if cell["sig_005"]:
        return "*"
    return ""


def _grouped_r_bars(report: dict, table: str, title: str):
    disciplines = report["disciplines"]
    order_key = {
        "levels": "level_order",
        "factors": "factor_order",
        "categories": "category_order",
    }[table]
    rows = [name for name in report[order_key] if name in report[table]]
    if not rows or not disciplines:
        return None
    fig, ax = plt.subplots(figsize=(max(5.0, 1.6 * len(rows)), 4.0))
    width = 0.8 / len(disciplines)
    base = np.arange(len(rows), dtype=float)
    for j, disc in enumerate(disciplines):
        xs = base + (j - (len(disciplines) - 1) / 2) * width
        cells = [report[table][name].get(disc) for name in rows]
        heights = [c["r"] if c else 0.0 for c in cells]
        bars = ax.bar(xs, heights, width=width * 0.9, label=disc)
        for bar, cell in zip(bars, cells):
            mark = _stars(cell)
            if mark:
                y = bar.get_height()
                offset = 0.04 if y >= 0 else -0.10
                ax.text(bar.get_x() + bar.get_width() / 2, y + offset, mark, ha="center")
    ax.set_xticks(base)
    ax.set_xticklabels(rows, rotation=20, ha="right")
    ax.set_ylim(-1.1, 1.1)
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_ylabel("correlation with citations (r)")
    ax.set_title(title)
    ax.legend(fontsize="small")
    fig.text(0.01, 0.01, _SIG_NOTE, fontsize="x-small")
    return fig


def _aspect_heatmap(report: dict):
    disciplines = report["disciplines"]
    aspects = report["aspect_order"]
    if not aspects or not disciplines:
        return None
    grid = np.full((len(aspects), len(disciplines)), np.nan)
    for i, aspect in enumerate(aspects):
        for j, disc in enumerate(disciplines):
            cell = report["aspects"].get(aspect, {}).get(disc)
            if cell is not None:
                grid[i, j] = cell["r"]
    fig, ax = plt.subplots(
        figsize=(max(4.0, 1.2 * len(disciplines) + 2), max(3.0, 0.45 * len(aspects) + 1.5))
    )
    cmap = plt.get_cmap("RdBu_r").copy()
    cmap.set_bad("0.85")
    image = ax.imshow(grid, cmap=cmap, vmin=-1.0, vmax=1.0, aspect="auto")
    for i, aspect in enumerate(aspects):
        for j, disc in enumerate(disciplines):
            cell = report["aspects"].get(aspect, {}).get(disc)
            if cell is not None:
                ax.text(
                    j, i, f"{cell['r']:.2f}{_stars(cell)}", ha="center", va="center",
                    fontsize="x-small",
                )
    ax.set_xticks(range(len(disciplines)), disciplines, rotation=20, ha="right")
    ax.set_yticks(range(len(aspects)), aspects)
    ax.set_title("aspect sentiment vs. citations")
    fig.colorbar(image, ax=ax, label="r")
    fig.text(0.01, 0.01, _SIG_NOTE, fontsize="x-small")
    return fig


def correlation_figures(report: dict, out_dir: Path) -> dict[Path, bytes]:
    outputs: dict[Path, bytes] = {}
    titles = {
        "levels": "fused score vs. citations by granularity",
        "factors": "single factors vs. citations",
        "categories": "aspect categories vs. citations",
    }
    for table, title in titles.items():
        fig = _grouped_r_bars(report, table, title)
        if fig is not None:
            outputs[out_dir / f"correlation_{table}.png"] = _png(fig)
    fig = _aspect_heatmap(report)
    if fig is not None:
        outputs[out_dir / "correlation_aspects.png"] = _png(fig)
    return outputs


def score_figures(report: dict, out_dir: Path) -> dict[Path, bytes]:
    disciplines = sorted(report["disciplines"])
    if not disciplines:
        return {}
    outputs: dict[Path, bytes] = {}

    factor_names = report["disciplines"][disciplines[0]]["factors"]
    fig, ax = plt.subplots(figsize=(max(5.0, 1.4 * len(factor_names)), 4.0))
    width = 0.8 / len(disciplines)
    base = np.arange(len(factor_names), dtype=float)
    for j, disc in enumerate(disciplines):
        entry = report["disciplines"][disc]
        weights = dict(zip(entry["factors"], entry["weights"]))
        xs = base + (j - (len(disciplines) - 1) / 2) * width
        ax.bar(xs, [weights.get(f, 0.0) for f in factor_names], width=width * 0.9, label=disc)
    ax.set_xticks(base)
    ax.set_xticklabels(factor_names, rotation=20, ha="right")
    ax.set_ylabel("entropy weight")
    ax.set_title("factor weights by discipline")
    ax.legend(fontsize="small")
    outputs[out_dir / "factor_weights.png"] = _png(fig)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for disc in disciplines:
        scores = sorted(
            (item["score"] for item in report["disciplines"][disc]["scores"]), reverse=True
        )
        ax.plot(range(1, len(scores) + 1), scores, marker=".", label=disc)
    ax.set_xlabel("books, best to worst")
    ax.set_ylabel("impact score")
    ax.set_title("fused impact score profiles")
    ax.legend(fontsize="small")
    outputs[out_dir / "score_profiles.png"] = _png(fig)
    return outputs
