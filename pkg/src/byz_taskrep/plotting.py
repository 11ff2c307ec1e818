"""SVG rendering of ratio tables."""

from __future__ import annotations

from collections import defaultdict
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .verify import RatioRow  # noqa: E402


def plot_ratio(rows: Sequence[RatioRow], path, title: str | None = None) -> None:
    """Ratio against p, one line per u.  Filled markers are exact values,
    hollow markers are upper bounds only."""
    if not rows:
        raise ValueError("nothing to plot")
    series = defaultdict(list)
    for r in rows:
        series[r.u].append(r)

    with plt.rc_context({"svg.hashsalt": "byz-taskrep", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        for k, (u, pts) in enumerate(sorted(series.items())):
            pts = sorted(pts, key=lambda r: r.p)
            color = f"C{k}"
            ax.plot([r.p for r in pts], [r.ratio for r in pts], color=color, lw=1.2, label=f"u={u}")
            solid = [r for r in pts if r.exact]
            hollow = [r for r in pts if not r.exact]
            ax.plot([r.p for r in solid], [r.ratio for r in solid], "o", color=color)
            ax.plot([r.p for r in hollow], [r.ratio for r in hollow], "o", mfc="none", color=color)
        ax.set_xlabel("number of sub-tasks p")
        ax.set_ylabel("c bound / trivial bound")
        ax.set_ylim(0, 1.05)
        if title:
            ax.set_title(title)
        ax.legend()
        ax.grid(alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
