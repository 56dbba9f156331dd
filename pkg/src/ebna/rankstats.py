"""Kruskal-Wallis H test and the adjacent-pair ranking used to group algorithms."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaincc
from scipy.stats import rankdata


@dataclass
class SampleGroup:
    label: str
    values: Sequence[float]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.size == 0:
            raise ValueError(f"group {self.label!r} is empty")

    @property
    def mean(self) -> float:
        return float(self.values.mean())


@dataclass
class KruskalResult:
    statistic: float
    p_value: float
    reject: bool
    df: int


@dataclass
class RankTable:
    """Algorithms in mean order (best first) with their group numbers."""

    labels: list
    means: list
    groups: list
    pair_tests: list

    def as_dict(self) -> dict:
        return dict(zip(self.labels, self.groups))


def chi2_upper_tail(x: float, df: int) -> float:
    """P(X > x) for a chi-square variable, via the regularised upper gamma."""
    if x <= 0:
        return 1.0
    return float(gammaincc(df / 2.0, x / 2.0))


def _as_arrays(groups) -> list[np.ndarray]:
    out = []
    for g in groups:
        vals = g.values if isinstance(g, SampleGroup) else np.asarray(g, dtype=float)
        vals = np.asarray(vals, dtype=float)
        if vals.size == 0:
            raise ValueError("Kruskal-Wallis groups must be nonempty")
        out.append(vals)
    return out


def kruskal_wallis(groups, alpha: float = 0.05) -> KruskalResult:
    """Kruskal-Wallis H with midranks and the usual tie correction.

    When every observation is tied the statistic is defined as 0.
    """
    arrays = _as_arrays(groups)
    k = len(arrays)
    if k < 2:
        raise ValueError("need at least two groups")
    pooled = np.concatenate(arrays)
    N = pooled.size
    if N < 3:
        raise ValueError("need at least three observations in total")
    ranks = rankdata(pooled)  # midranks
    h = 0.0
    start = 0
    for a in arrays:
        r = ranks[start:start + a.size]
        h += r.sum() ** 2 / a.size
        start += a.size
    h = 12.0 / (N * (N + 1)) * h - 3.0 * (N + 1)
    _, tie_sizes = np.unique(pooled, return_counts=True)
    correction = 1.0 - float((tie_sizes ** 3 - tie_sizes).sum()) / (N ** 3 - N)
    if correction <= 0:
        return KruskalResult(0.0, 1.0, False, k - 1)
    h = max(h / correction, 0.0)
    p = chi2_upper_tail(h, k - 1)
    return KruskalResult(h, p, p < alpha, k - 1)


def pairwise_rank_grouping(groups: Sequence[SampleGroup], alpha: float = 0.05,
                           maximize: bool = True) -> RankTable:
    """Order algorithms by mean and test each against the next one.

    The first algorithm gets 1. Each following algorithm keeps its
    predecessor's number when their test does not reject, otherwise it gets
    its own 1-based position in the ordering.
    """
    groups = list(groups)
    # stable sort: equal means keep input order
    order = sorted(range(len(groups)),
                   key=lambda g: -groups[g].mean if maximize else groups[g].mean)
    ranked = [groups[g] for g in order]
    numbers = [1]
    tests = []
    for pos in range(1, len(ranked)):
        res = kruskal_wallis([ranked[pos - 1], ranked[pos]], alpha)
        tests.append((ranked[pos - 1].label, ranked[pos].label, res))
        numbers.append(numbers[-1] if not res.reject else pos + 1)
    return RankTable([g.label for g in ranked], [g.mean for g in ranked], numbers, tests)
