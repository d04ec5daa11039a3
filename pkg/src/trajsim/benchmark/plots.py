"""SVG charts rendered from report rows."""

from __future__ import annotations

import io
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from ..metric_index import atomic_write_bytes  # noqa: E402

# fixed ids and no timestamp keep the SVG bytes stable across runs
_RC = {"svg.hashsalt": "trajsim", "svg.fonttype": "path", "font.size": 9}


def _save_svg(fig, path: Path) -> None:
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    atomic_write_bytes(path, buf.getvalue())


def plot_hr(report, path: Path) -> Path:
    """HR@k against the transform parameter, one panel per transform kind."""
    series = defaultdict(lambda: defaultdict(list))
    for r in report.rows:
        if r.hr_at_k is not None:
            series[r.transform][r.measure].append((float(r.param), r.hr_at_k))
    kinds = sorted(series) or ["identity"]
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(1, len(kinds), figsize=(3.2 * len(kinds), 2.8), squeeze=False)
        for ax, kind in zip(axes[0], kinds):
            for measure in sorted(series[kind]):
                pts = sorted(series[kind][measure])
                ax.plot([p for p, _ in pts], [h for _, h in pts], marker="o", ms=3, lw=1, label=measure)
            ax.set_title(kind)
            ax.set_xlabel("parameter (%)")
            ax.set_ylim(-0.05, 1.05)
            ax.grid(alpha=0.3, lw=0.5)
        axes[0][0].set_ylabel(f"HR@{report.k}")
        handles, labels = axes[0][0].get_legend_handles_labels()
        if handles:
            fig.legend(handles, labels, loc="center left", bbox_to_anchor=(1.0, 0.5), frameon=False)
        _save_svg(fig, Path(path))
    return Path(path)


def plot_query_time(report, path: Path) -> Path:
    """Mean query time per measure over all rows that recorded one."""
    acc = defaultdict(list)
    for r in report.rows:
        if r.query_ms is not None:
            acc[r.measure].append(r.query_ms)
    names = sorted(acc)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(max(3.0, 0.5 * len(names) + 1.5), 2.8))
        ax.bar(range(len(names)), [sum(acc[n]) / len(acc[n]) for n in names], color="#4c72b0")
        ax.set_xticks(range(len(names)))
        ax.set_xticklabels(names, rotation=45, ha="right")
        ax.set_ylabel("query time (ms)")
        if not names:
            ax.text(0.5, 0.5, "timing disabled", ha="center", va="center", transform=ax.transAxes)
        ax.grid(axis="y", alpha=0.3, lw=0.5)
        _save_svg(fig, Path(path))
    return Path(path)
