"""Machine-readable reports and the figures rendered alongside them.

Reports are JSON with stable field names (see README); comparison runs
additionally emit a delimited CSV table. When figure rendering is
requested, PNGs are written next to the report file: per-level
occupancy against the optimal series for basic tree runs, the
theoretical ratio curves with the measured point, and a per-store bar
chart for comparisons. All ratios in a report are recomputable from
the raw counters it carries.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from pathlib import Path

from .analytics import (
    CompressionStats,
    collapse_best_ratio,
    collapse_worst_ratio,
    optimal_level_series,
    tree_best_ratio,
    tree_worst_ratio,
)
from .reachability import ExplorationReport

SCHEMA_EXPLORE = "treedb-explore-v1"
SCHEMA_COMPARE = "treedb-compare-v1"

CSV_FIELDS = (
    "store", "states", "entries_total", "words_compressed", "words_plain",
    "ratio", "per_state_words", "per_state_bytes", "overhead_words",
)


def explore_report_dict(report: ExplorationReport, stats: CompressionStats) -> dict:
    return {
        "schema": SCHEMA_EXPLORE,
        "model": report.model,
        "exploration": dataclasses.asdict(report),
        "compression": stats.to_dict(),
    }


def compare_report_dict(model_name: str, runs: list[dict]) -> dict:
    return {"schema": SCHEMA_COMPARE, "model": model_name, "runs": runs}


def write_json(data: dict, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, default=str) + "\n", encoding="utf-8")
    return path


def write_compare_csv(runs: list[dict], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for run in runs:
            comp = dict(run["compression"])
            comp["states"] = comp.get("n", "")
            writer.writerow({field: comp.get(field, "") for field in CSV_FIELDS})
    return path


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_level_figure(stats: dict, path) -> Path | None:
    """Per-level occupancy bars with the optimal series overlaid."""
    levels = stats.get("entries_per_level")
    n, k = stats.get("n", 0), stats.get("k", 0)
    if not levels or n < 1 or k < 2:
        return None
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = list(range(len(levels)))
    ax.bar(xs, levels, color="#4878a8", label="measured entries")
    if k & (k - 1) == 0:
        optimal = optimal_level_series(n, k)
        ax.plot(xs[: len(optimal)], optimal, "o-", color="#b8503c", label="optimal")
    ax.set_xlabel("tree level (root = 0)")
    ax.set_ylabel("node entries")
    ax.set_yscale("log")
    ax.set_title(f"Occupancy per tree level (n={n}, k={k})")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def render_ratio_figure(stats: dict, path, p: int = 1) -> Path:
    """Measured ratio against the theoretical bounds over vector length."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 4))
    ks = [k for k in range(2, 66, 2)]
    ax.plot(ks, [float(tree_worst_ratio(k)) for k in ks], "--", color="#b8503c",
            label="tree worst 2-2/k")
    ax.plot(ks, [float(tree_best_ratio(k)) for k in ks], "-", color="#4878a8",
            label="tree best 2/k")
    ax.plot(ks, [float(collapse_worst_ratio(p, k)) for k in ks], "--", color="#708047",
            label=f"process table worst 1+{p}/k")
    ax.plot(ks, [float(collapse_best_ratio(p, k)) for k in ks], "-", color="#9467bd",
            label=f"process table best {p}/k")
    ax.plot([stats["k"]], [stats["ratio"]], "k*", markersize=14,
            label=f"measured ({stats['store']})")
    ax.set_xlabel("vector length k")
    ax.set_ylabel("compression ratio")
    ax.set_title("Compression ratio vs. theoretical bounds")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def render_compare_figure(runs: list[dict], path) -> Path:
    """Per-store bytes per state, the headline comparison."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 4))
    names = [run["compression"]["store"] for run in runs]
    per_state = [run["compression"]["per_state_bytes"] for run in runs]
    bars = ax.bar(names, per_state, color="#4878a8")
    ax.bar_label(bars, fmt="%.2f")
    ax.set_ylabel("bytes per state")
    ax.set_title("Compressed state size by store")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def render_explore_figures(data: dict, stem: Path) -> list[Path]:
    comp = data["compression"]
    layout_p = 1
    written = []
    fig = render_level_figure(comp, stem.with_name(stem.name + "_levels.png"))
    if fig is not None:
        written.append(fig)
    written.append(
        render_ratio_figure(comp, stem.with_name(stem.name + "_ratios.png"), p=layout_p)
    )
    return written


def render_compare_figures(data: dict, stem: Path) -> list[Path]:
    written = [render_compare_figure(data["runs"], stem.with_name(stem.name + "_stores.png"))]
    for run in data["runs"]:
        fig = render_level_figure(
            run["compression"],
            stem.with_name(f"{stem.name}_levels_{run['compression']['store']}.png"),
        )
        if fig is not None:
            written.append(fig)
    return written
