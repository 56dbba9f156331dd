"""Figures written alongside the report tables."""
from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}


def figsize(scale=1.0, ratio=0.62):
    width = 6.0 * scale
    return (width, width * ratio)


def final_value_boxplots(report, out_dir, stem) -> list[Path]:
    paths = []
    with plt.rc_context(STYLE):
        for p in report.problems:
            algos = [a for a in report.algorithms if (p, a) in report.cells]
            fig, ax = plt.subplots(figsize=figsize())
            ax.boxplot([report.cells[(p, a)].values for a in algos])
            ax.set_xticks(range(1, len(algos) + 1), algos, rotation=20)
            groups = report.ranks[p].as_dict()
            for k, a in enumerate(algos, 1):
                ax.annotate(str(groups[a]), (k, 1.0), xycoords=("data", "axes fraction"),
                            ha="center", va="bottom", fontsize=7)
            ax.set_ylabel("final best value" + (" (min)" if report.directions[p] == "min" else ""))
            ax.set_title(p)
            fig.tight_layout()
            path = Path(out_dir) / f"{stem}.{p}.final.png"
            fig.savefig(path)
            plt.close(fig)
            paths.append(path)
    return paths


def convergence_curves(trace_rows, result_rows, out_dir, stem) -> list[Path]:
    """Median best-so-far against evaluations, one line per algorithm."""
    meta = {r["run_id"]: (r["problem"], r["algorithm"]) for r in result_rows}
    runs = defaultdict(lambda: defaultdict(list))
    for t in trace_rows:
        if t["run_id"] not in meta:
            continue
        p, a = meta[t["run_id"]]
        runs[p][(a, t["run_id"])].append((int(t["evaluations"]), float(t["best"])))
    paths = []
    with plt.rc_context(STYLE):
        for p, series in runs.items():
            fig, ax = plt.subplots(figsize=figsize())
            by_algo = defaultdict(list)
            for (a, _), pts in series.items():
                by_algo[a].append(np.array(pts))
            for a, curves in sorted(by_algo.items()):
                grid = np.unique(np.concatenate([c[:, 0] for c in curves]))
                # step interpolation: best-so-far holds between checkpoints
                stacked = []
                for c in curves:
                    idx = np.searchsorted(c[:, 0], grid, side="right") - 1
                    stacked.append(np.where(idx >= 0, c[np.maximum(idx, 0), 1], np.nan))
                ax.step(grid, np.nanmedian(np.array(stacked), axis=0), where="post", label=a)
            ax.set_xlabel("evaluations")
            ax.set_ylabel("best so far (median over runs)")
            ax.set_title(p)
            ax.legend(frameon=False)
            fig.tight_layout()
            path = Path(out_dir) / f"{stem}.{p}.convergence.png"
            fig.savefig(path)
            plt.close(fig)
            paths.append(path)
    return paths
