#!/usr/bin/env python3
"""Render the benchmark figures from a results directory.

Reads the plotdata/ tables written by `bctmp bench` and produces three
PNGs next to them: success-rate bars, planning-time distributions (log
scale), and artifact memory bars.

Usage:
    python3 scripts/plot_results.py results/ [more_results_dirs ...]
"""

import csv
import sys
from pathlib import Path

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:  # pragma: no cover - depends on the host environment
    sys.exit("plot_results.py needs matplotlib (pip install matplotlib)")

ORDER = ["bctmp", "online", "prm", "vctmp"]
COLORS = {"bctmp": "#2a9d8f", "online": "#e76f51", "prm": "#f4a261", "vctmp": "#8ab17d"}


def read_rows(path: Path) -> list[dict]:
    with path.open(newline="") as handle:
        return list(csv.DictReader(handle))


def planner_order(rows: list[dict]) -> list[str]:
    seen = []
    for row in rows:
        if row["planner"] not in seen:
            seen.append(row["planner"])
    return sorted(seen, key=lambda p: ORDER.index(p) if p in ORDER else len(ORDER))


def plot_success(plotdata: Path, out: Path) -> None:
    rows = read_rows(plotdata / "success_rate.csv")
    planners = planner_order(rows)
    by_planner = {r["planner"]: r for r in rows}
    rates = [
        100.0 * float(by_planner[p]["success_rate"] or 0.0) for p in planners
    ]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    bars = ax.bar(planners, rates, color=[COLORS.get(p, "#888") for p in planners])
    for bar, p in zip(bars, planners):
        r = by_planner[p]
        ax.annotate(
            f"{r['successes']}/{r['trials']}",
            (bar.get_x() + bar.get_width() / 2, bar.get_height()),
            ha="center",
            va="bottom",
            fontsize=8,
        )
    ax.set_ylabel("success rate [%]")
    ax.set_ylim(0, 110)
    ax.set_title("End-to-end success")
    fig.tight_layout()
    fig.savefig(out, dpi=160)
    plt.close(fig)


def plot_times(plotdata: Path, out: Path) -> None:
    rows = read_rows(plotdata / "times.csv")
    planners = planner_order(rows)
    samples = {
        p: [float(r["planning_seconds"]) for r in rows if r["planner"] == p]
        for p in planners
    }
    data = [[max(t, 1e-9) for t in samples[p]] for p in planners]
    if not any(data):
        return
    fig, ax = plt.subplots(figsize=(5, 3.2))
    box = ax.boxplot(data, tick_labels=planners, patch_artist=True, whis=(1, 99))
    for patch, p in zip(box["boxes"], planners):
        patch.set_facecolor(COLORS.get(p, "#888"))
    ax.set_yscale("log")
    ax.set_ylabel("online planning time [s]")
    ax.set_title("Per-query planning time")
    fig.tight_layout()
    fig.savefig(out, dpi=160)
    plt.close(fig)


def plot_memory(plotdata: Path, out: Path) -> None:
    rows = read_rows(plotdata / "memory.csv")
    planners = planner_order(rows)
    by_planner = {r["planner"]: int(r["memory_bytes"]) for r in rows}
    kib = [by_planner[p] / 1024.0 for p in planners]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    bars = ax.bar(planners, kib, color=[COLORS.get(p, "#888") for p in planners])
    for bar, p in zip(bars, planners):
        ax.annotate(
            f"{by_planner[p]}",
            (bar.get_x() + bar.get_width() / 2, bar.get_height()),
            ha="center",
            va="bottom",
            fontsize=8,
        )
    ax.set_ylabel("stored artifact [KiB]")
    ax.set_title("Planner memory")
    fig.tight_layout()
    fig.savefig(out, dpi=160)
    plt.close(fig)


def main() -> None:
    dirs = [Path(a) for a in sys.argv[1:]]
    if not dirs:
        sys.exit(__doc__)
    for results in dirs:
        plotdata = results / "plotdata"
        if not plotdata.is_dir():
            sys.exit(f"{results}: no plotdata/ directory (run `bctmp bench` first)")
        plot_success(plotdata, results / "success_rate.png")
        plot_times(plotdata, results / "times.png")
        plot_memory(plotdata, results / "memory.png")
        print(f"{results}: wrote success_rate.png, times.png, memory.png")


if __name__ == "__main__":
    main()
