"""Decomposable structure scores (BIC and penalised K2) and the K2 parent bound.

Everything is in the natural-log domain; factorials go through ``gammaln``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .bayesnet import (DagStructure, InvalidStructureError, SufficientStats,
                       ancestral_ordering, configuration_column, family_counts)
from .genome import Dataset

BIC = "bic"
K2PEN = "k2pen"
METRICS = (BIC, K2PEN)


@dataclass(frozen=True)
class PenaltySpec:
    """Weight f(N) on the parameter count for the penalised K2 score.

    ``kind`` is ``"aic"`` (f = 1), ``"bic"`` (f = log(N)/2) or ``"const"``
    (f = ``value``).
    """

    kind: str = "aic"
    value: float = 1.0

    def __post_init__(self):
        if self.kind not in ("aic", "bic", "const"):
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        if self.kind == "const" and self.value < 0:
            raise ValueError("penalty weight must be nonnegative")

    def __call__(self, n_rows: int) -> float:
        if self.kind == "aic":
            return 1.0
        if self.kind == "bic":
            return math.log(n_rows) / 2.0 if n_rows > 0 else 0.0
        return float(self.value)

    @classmethod
    def parse(cls, text: str) -> "PenaltySpec":
        text = str(text).strip().lower()
        if text in ("aic", "bic"):
            return cls(text)
        return cls("const", float(text))


AIC = PenaltySpec("aic")


@dataclass(frozen=True)
class FamilyScore:
    variable: int
    parents: tuple
    value: float


def _xlogx_ratio(counts: np.ndarray) -> np.ndarray:
    """Sum over the last axis of N_ijk log(N_ijk / N_ij), zero terms dropped."""
    counts = np.asarray(counts, dtype=float)
    nij = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(counts > 0, counts * np.log(counts / nij), 0.0)
    return terms.sum(axis=-1)


def bic_from_counts(counts: np.ndarray, n_rows: int) -> np.ndarray:
    """BIC family score from a (..., q, r) counts table."""
    counts = np.asarray(counts)
    q, r = counts.shape[-2:]
    ll = _xlogx_ratio(counts).sum(axis=-1)
    log_n = math.log(n_rows) if n_rows > 0 else 0.0
    return ll - 0.5 * log_n * (r - 1) * q


def k2_log_marginal(counts: np.ndarray) -> np.ndarray:
    counts = np.asarray(counts, dtype=float)
    r = counts.shape[-1]
    nij = counts.sum(axis=-1)
    per_cfg = gammaln(r) - gammaln(nij + r) + gammaln(counts + 1.0).sum(axis=-1)
    return per_cfg.sum(axis=-1)


def k2pen_from_counts(counts: np.ndarray, n_rows: int, pen: PenaltySpec = AIC) -> np.ndarray:
    counts = np.asarray(counts)
    q, r = counts.shape[-2:]
    return k2_log_marginal(counts) - pen(n_rows) * (r - 1) * q


def _family_table(stats_or_data, i: int, parents: Sequence[int]) -> tuple[np.ndarray, int]:
    if isinstance(stats_or_data, SufficientStats):
        if tuple(stats_or_data.structure.parents[i]) != tuple(sorted(parents)):
            raise ValueError("stats were not computed for this family")
        return stats_or_data.counts[i], stats_or_data.n_rows
    data = stats_or_data
    return family_counts(data.rows, i, tuple(sorted(parents)), data.cardinalities), data.n_rows


def bic_family(i: int, parents: Sequence[int], stats, n_rows: int | None = None) -> float:
    """BIC contribution of variable ``i`` with ``parents``.

    ``stats`` is either the :class:`SufficientStats` of a structure containing
    this family or a :class:`Dataset`.
    """
    counts, rows = _family_table(stats, i, parents)
    return float(bic_from_counts(counts, rows if n_rows is None else n_rows))


def k2pen_family(i: int, parents: Sequence[int], stats, n_rows: int | None = None,
                 pen: PenaltySpec = AIC) -> float:
    counts, rows = _family_table(stats, i, parents)
    return float(k2pen_from_counts(counts, rows if n_rows is None else n_rows, pen))


def score_structure(structure: DagStructure, data: Dataset, metric: str = BIC,
                    pen: PenaltySpec = AIC) -> float:
    ancestral_ordering(structure)  # raises on a cycle
    scorer = FamilyScorer(data, metric, pen)
    return scorer.total(structure)


class FamilyScorer:
    """Cached family scores for one dataset and metric.

    The cache is keyed by ``(variable, parent tuple)``. ``add_candidates``
    scores every single-parent extension of a family in one pass.
    """

    def __init__(self, data: Dataset, metric: str = BIC, pen: PenaltySpec = AIC):
        if metric not in METRICS:
            raise ValueError(f"unknown metric {metric!r}")
        self.data = data
        self.metric = metric
        self.pen = pen
        self.rows = data.rows
        self.card = data.cardinalities
        self.n_rows = data.n_rows
        self.cache: dict[tuple[int, tuple], float] = {}
        self.calls = 0
        offsets = np.concatenate(([0], np.cumsum(self.card)))
        self._offsets = offsets
        self._onehot = np.zeros((self.n_rows, int(offsets[-1])), dtype=np.float64)
        for j in range(data.n_vars):
            self._onehot[np.arange(self.n_rows), offsets[j] + self.rows[:, j]] = 1.0
        self._by_card = {int(r): np.flatnonzero(self.card == r) for r in np.unique(self.card)}

    def score_counts(self, counts: np.ndarray) -> np.ndarray:
        if self.metric == BIC:
            return bic_from_counts(counts, self.n_rows)
        return k2pen_from_counts(counts, self.n_rows, self.pen)

    def family(self, i: int, parents: Sequence[int]) -> float:
        key = (i, tuple(sorted(parents)))
        val = self.cache.get(key)
        if val is None:
            self.calls += 1
            counts = family_counts(self.rows, i, key[1], self.card)
            val = float(self.score_counts(counts))
            self.cache[key] = val
        return val

    def total(self, structure: DagStructure) -> float:
        return sum(self.family(i, ps) for i, ps in enumerate(structure.parents))

    def add_candidates(self, i: int, parents: Sequence[int]) -> np.ndarray:
        """Score of family ``i`` with ``parents + [j]`` for every ``j``.

        Entries for ``j == i`` and ``j`` already in ``parents`` are NaN.
        """
        parents = tuple(sorted(parents))
        r_i = int(self.card[i])
        cfg = configuration_column(self.rows, parents, self.card)
        key = cfg * r_i + self.rows[:, i]
        # joint[key, column of (j, v)] = rows with that (config, x_i) and x_j = v
        uniq, inverse = np.unique(key, return_inverse=True)
        joint_u = np.zeros((len(uniq), self._onehot.shape[1]))
        np.add.at(joint_u, inverse, self._onehot)
        q = int(np.prod([self.card[p] for p in parents])) if parents else 1
        joint = np.zeros((q * r_i, self._onehot.shape[1]))
        joint[uniq] = joint_u
        joint = joint.reshape(q, r_i, -1)

        out = np.full(len(self.card), np.nan)
        for r_j, members in self._by_card.items():
            cols = (self._offsets[members][:, None] + np.arange(r_j)[None, :])  # (m, r_j)
            block = joint[:, :, cols]                      # (q, r_i, m, r_j)
            block = block.transpose(2, 0, 3, 1)            # (m, q, r_j, r_i)
            block = block.reshape(len(members), q * r_j, r_i)
            out[members] = self.score_counts(block)
        out[i] = np.nan
        if parents:
            out[list(parents)] = np.nan
        for j in np.flatnonzero(~np.isnan(out)):
            self.cache.setdefault((i, tuple(sorted(parents + (int(j),)))), float(out[j]))
        return out


def parent_bound_rhs(r_i: int, n_rows: int, f: float) -> float:
    """Right-hand side of the parent-count inequality for a variable with ``r_i`` values."""
    m, l = divmod(n_rows, r_i)
    log_term = (gammaln(n_rows + 1) + gammaln(r_i + l) - gammaln(n_rows + r_i)
                + m * (gammaln(2 * r_i) - gammaln(r_i)))
    return float(log_term / ((r_i - 1) * f))


def parent_bound_lhs(others_sorted: Sequence[int], pa: int) -> int:
    """Product of the pa+1 smallest other cardinalities minus the product of the pa largest."""
    small = math.prod(others_sorted[: pa + 1])
    large = math.prod(others_sorted[len(others_sorted) - pa:]) if pa > 0 else 1
    return small - large


def parent_bound(i: int, cardinalities, n_rows: int, pen: PenaltySpec = AIC) -> int:
    """Largest number of parents variable ``i`` can have in a K2+pen optimal structure.

    Returns ``n - 1`` (no restriction) when no smaller count satisfies the bound.
    """
    card = [int(r) for r in cardinalities]
    n = len(card)
    if n < 2:
        raise ValueError("need at least two variables")
    f = pen(n_rows)
    if f <= 0:
        raise ValueError("parent bound needs f(N) > 0")
    rhs = parent_bound_rhs(card[i], n_rows, f)
    others = sorted(card[:i] + card[i + 1:])
    for pa in range(n - 1):
        if parent_bound_lhs(others, pa) > rhs:
            return pa
    return n - 1


def parent_bounds(cardinalities, n_rows: int, pen: PenaltySpec = AIC) -> list[int]:
    """:func:`parent_bound` for every variable, memoised on cardinality."""
    card = [int(r) for r in cardinalities]
    memo: dict[tuple, int] = {}
    out = []
    for i, r in enumerate(card):
        others = tuple(sorted(card[:i] + card[i + 1:]))
        key = (r, others)
        if key not in memo:
            memo[key] = parent_bound(i, card, n_rows, pen)
        out.append(memo[key])
    return out
