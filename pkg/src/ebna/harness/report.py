"""Aggregation of a results file into mean and rank-group tables plus figures."""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..benchmarks import PROBLEMS
from ..rankstats import KruskalResult, RankTable, SampleGroup, kruskal_wallis, pairwise_rank_grouping
from .config import ALGORITHMS
from .runner import SEP, read_results, read_trace


class AggregationError(ValueError):
    pass


@dataclass
class CellStats:
    problem: str
    algorithm: str
    values: np.ndarray

    @property
    def mean(self) -> float:
        return float(self.values.mean())

    @property
    def median(self) -> float:
        return float(np.median(self.values))

    @property
    def std(self) -> float:
        return float(self.values.std(ddof=1)) if len(self.values) > 1 else 0.0


@dataclass
class StatReport:
    cells: dict = field(default_factory=dict)        # (problem, algorithm) -> CellStats
    directions: dict = field(default_factory=dict)   # problem -> "max" | "min"
    omnibus: dict = field(default_factory=dict)      # problem -> KruskalResult | None
    ranks: dict = field(default_factory=dict)        # problem -> RankTable

    @property
    def problems(self) -> list[str]:
        seen = OrderedDict((p, None) for p, _ in self.cells)
        return sorted(seen, key=lambda p: PROBLEMS.index(p) if p in PROBLEMS else len(PROBLEMS))

    @property
    def algorithms(self) -> list[str]:
        seen = OrderedDict((a, None) for _, a in self.cells)
        return sorted(seen, key=lambda a: ALGORITHMS.index(a) if a in ALGORITHMS else len(ALGORITHMS))


def aggregate(rows: list[dict], alpha: float = 0.05) -> StatReport:
    """Group run rows by (problem, algorithm) and run the rank tests per problem."""
    values: dict[tuple, list] = OrderedDict()
    config_ids: dict[tuple, str] = {}
    report = StatReport()
    for row in rows:
        key = (row["problem"], row["algorithm"])
        cid = row.get("config_id", "")
        if key in config_ids and config_ids[key] != cid:
            raise AggregationError(f"cell {key} mixes configurations "
                                   f"{config_ids[key]} and {cid}")
        config_ids[key] = cid
        values.setdefault(key, []).append(float(row["final_best"]))
        direction = row.get("direction") or ("min" if row["problem"] == "equalproducts" else "max")
        if report.directions.setdefault(row["problem"], direction) != direction:
            raise AggregationError(f"problem {row['problem']} has mixed directions")
    for key, vals in values.items():
        report.cells[key] = CellStats(key[0], key[1], np.asarray(vals))
    for p in report.problems:
        groups = [SampleGroup(a, report.cells[(p, a)].values)
                  for a in report.algorithms if (p, a) in report.cells]
        maximize = report.directions[p] == "max"
        report.ranks[p] = pairwise_rank_grouping(groups, alpha, maximize)
        n_total = sum(len(g.values) for g in groups)
        report.omnibus[p] = kruskal_wallis(groups, alpha) if len(groups) >= 2 and n_total >= 3 else None
    return report


def mean_table(report: StatReport) -> list[list[str]]:
    """Rows: algorithms; columns: problems; entries: mean final best value."""
    out = [["algorithm"] + report.problems]
    for a in report.algorithms:
        row = [a]
        for p in report.problems:
            cell = report.cells.get((p, a))
            row.append("" if cell is None else f"{cell.mean:.6g}")
        out.append(row)
    return out


def summary_table(report: StatReport) -> list[list[str]]:
    out = [["problem", "algorithm", "runs", "mean", "median", "std"]]
    for p in report.problems:
        for a in report.algorithms:
            c = report.cells.get((p, a))
            if c is not None:
                out.append([p, a, str(len(c.values)), f"{c.mean:.6g}", f"{c.median:.6g}",
                            f"{c.std:.6g}"])
    return out


def rank_table(report: StatReport) -> list[list[str]]:
    """Rows: algorithms; columns: problems; entries: rank group numbers."""
    out = [["algorithm"] + report.problems]
    lookup = {p: report.ranks[p].as_dict() for p in report.problems}
    for a in report.algorithms:
        out.append([a] + [str(lookup[p].get(a, "")) for p in report.problems])
    return out


def omnibus_table(report: StatReport) -> list[list[str]]:
    out = [["problem", "H", "p_value", "reject"]]
    for p in report.problems:
        res: KruskalResult | None = report.omnibus[p]
        if res is None:
            out.append([p, "", "", ""])
        else:
            out.append([p, f"{res.statistic:.6g}", f"{res.p_value:.6g}", str(res.reject).lower()])
    return out


def render(table: list[list[str]], sep: str = SEP) -> str:
    return "\n".join(sep.join(row) for row in table) + "\n"


def render_aligned(table: list[list[str]]) -> str:
    widths = [max(len(row[k]) for row in table) for k in range(len(table[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()
                     for row in table) + "\n"


def write_report(results_path, out_dir=None, figures: bool = True, alpha: float = 0.05):
    """Aggregate ``results_path``; write tables (and figures) next to it.

    Returns the :class:`StatReport` and the list of files written.
    """
    results_path = Path(results_path)
    out_dir = Path(out_dir) if out_dir else results_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    report = aggregate(read_results(results_path), alpha)
    stem = results_path.stem
    written = []
    for name, table in (("means", mean_table(report)), ("summary", summary_table(report)),
                        ("ranks", rank_table(report)), ("kruskal", omnibus_table(report))):
        path = out_dir / f"{stem}.{name}.tsv"
        path.write_text(render(table), encoding="utf-8")
        written.append(path)
    if figures:
        from . import plots

        written += plots.final_value_boxplots(report, out_dir, stem)
        trace_path = results_path.with_name(results_path.name + ".trace.tsv")
        if trace_path.exists():
            rows = read_results(results_path)
            written += plots.convergence_curves(read_trace(trace_path), rows, out_dir, stem)
    return report, written
