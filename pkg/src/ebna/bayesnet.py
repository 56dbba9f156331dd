"""Discrete Bayesian networks: structure, counts, parameters and forward sampling.

Parent configurations use a mixed-radix code over the parents in ascending
variable order with the highest-index parent least significant. Internally
configurations are 0-based (``range(q_i)``); :func:`parent_configuration_index`
reports the 1-based ``j`` used in the counting formulas.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .genome import Dataset


class InvalidStructureError(ValueError):
    pass


class DagStructure:
    """Parent sets of a DAG over ``n`` variables."""

    def __init__(self, n: int, parents: Sequence[Iterable[int]] | None = None):
        self.n = int(n)
        if parents is None:
            parents = [() for _ in range(self.n)]
        if len(parents) != self.n:
            raise InvalidStructureError("need one parent set per variable")
        self.parents = [tuple(sorted(int(p) for p in ps)) for ps in parents]
        for i, ps in enumerate(self.parents):
            if len(set(ps)) != len(ps):
                raise InvalidStructureError(f"duplicate parent for variable {i}")
            if i in ps:
                raise InvalidStructureError(f"variable {i} is its own parent")
            if ps and (ps[0] < 0 or ps[-1] >= self.n):
                raise InvalidStructureError(f"parent index out of range for variable {i}")

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[tuple[int, int]]) -> "DagStructure":
        parents = [[] for _ in range(n)]
        for u, v in arcs:
            parents[v].append(u)
        return cls(n, parents)

    def arcs(self) -> list[tuple[int, int]]:
        return [(p, i) for i in range(self.n) for p in self.parents[i]]

    @property
    def n_arcs(self) -> int:
        return sum(len(ps) for ps in self.parents)

    def is_acyclic(self) -> bool:
        try:
            ancestral_ordering(self)
        except InvalidStructureError:
            return False
        return True

    def copy(self) -> "DagStructure":
        return DagStructure(self.n, self.parents)

    def __eq__(self, other):
        return isinstance(other, DagStructure) and self.parents == other.parents

    def __hash__(self):
        return hash(tuple(self.parents))

    def __repr__(self):
        return f"DagStructure(n={self.n}, arcs={self.arcs()})"


def ancestral_ordering(structure: DagStructure) -> list[int]:
    """Topological order; among ready variables the lowest index goes first."""
    import heapq

    n = structure.n
    indegree = [len(ps) for ps in structure.parents]
    children = [[] for _ in range(n)]
    for i, ps in enumerate(structure.parents):
        for p in ps:
            children[p].append(i)
    ready = [i for i in range(n) if indegree[i] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for c in children[v]:
            indegree[c] -= 1
            if indegree[c] == 0:
                heapq.heappush(ready, c)
    if len(order) != n:
        raise InvalidStructureError("structure contains a directed cycle")
    return order


def radix_weights(parents: Sequence[int], cardinalities) -> np.ndarray:
    r = np.asarray([cardinalities[p] for p in parents], dtype=np.int64)
    if len(r) == 0:
        return r
    return np.concatenate((np.cumprod(r[:0:-1])[::-1], [1]))


def n_configurations(parents: Sequence[int], cardinalities) -> int:
    q = 1
    for p in parents:
        q *= int(cardinalities[p])
    return q


def parent_configuration_index(structure: DagStructure, i: int, row, cardinalities) -> int:
    ps = structure.parents[i]
    if not ps:
        return 1
    row = np.asarray(row)
    return 1 + int(np.dot(row[list(ps)], radix_weights(ps, cardinalities)))


def configuration_column(rows: np.ndarray, parents: Sequence[int], cardinalities) -> np.ndarray:
    """Vectorised :func:`parent_configuration_index` over every row."""
    if not parents:
        return np.zeros(rows.shape[0], dtype=np.int64)
    w = radix_weights(parents, cardinalities)
    return rows[:, list(parents)].astype(np.int64) @ w


def family_counts(rows: np.ndarray, i: int, parents: Sequence[int], cardinalities) -> np.ndarray:
    """Counts table of shape (q_i, r_i): rows by parent configuration, columns by value."""
    r = int(cardinalities[i])
    q = n_configurations(parents, cardinalities)
    cfg = configuration_column(rows, parents, cardinalities)
    flat = np.bincount(cfg * r + rows[:, i].astype(np.int64), minlength=q * r)
    return flat.reshape(q, r)


@dataclass
class SufficientStats:
    structure: DagStructure
    counts: list  # per variable, ndarray (q_i, r_i)
    n_rows: int

    def family(self, i: int) -> np.ndarray:
        return self.counts[i]

    def marginals(self, i: int) -> np.ndarray:
        return self.counts[i].sum(axis=1)


def count_stats(structure: DagStructure, data: Dataset) -> SufficientStats:
    counts = [family_counts(data.rows, i, structure.parents[i], data.cardinalities)
              for i in range(structure.n)]
    return SufficientStats(structure, counts, data.n_rows)


class BayesianNetwork:
    """A DAG with one conditional probability table per variable.

    ``theta[i]`` has shape (q_i, r_i); row ``j`` is the distribution of
    variable ``i`` given parent configuration ``j``.
    """

    def __init__(self, structure: DagStructure, theta, cardinalities):
        self.structure = structure
        self.cardinalities = np.asarray(cardinalities, dtype=np.int64)
        self.theta = [np.asarray(t, dtype=float) for t in theta]
        for i, t in enumerate(self.theta):
            q = n_configurations(structure.parents[i], self.cardinalities)
            if t.shape != (q, self.cardinalities[i]):
                raise ValueError(f"CPT of variable {i} has shape {t.shape}, "
                                 f"expected {(q, int(self.cardinalities[i]))}")
            if np.any(t <= 0):
                raise ValueError(f"CPT of variable {i} has a non-positive entry")
            if np.any(np.abs(t.sum(axis=1) - 1.0) > 1e-9):
                raise ValueError(f"CPT rows of variable {i} do not sum to one")
        self.order = ancestral_ordering(structure)
        self._cdf = [np.cumsum(t, axis=1) for t in self.theta]

    @property
    def n(self) -> int:
        return self.structure.n

    @classmethod
    def uniform(cls, cardinalities) -> "BayesianNetwork":
        """Arc-less network giving every individual the same probability."""
        card = np.asarray(cardinalities, dtype=np.int64)
        theta = [np.full((1, r), 1.0 / r) for r in card]
        return cls(DagStructure(len(card)), theta, card)

    def log_probability(self, rows) -> np.ndarray:
        rows = np.atleast_2d(np.asarray(rows, dtype=np.int64))
        total = np.zeros(rows.shape[0])
        for i, ps in enumerate(self.structure.parents):
            cfg = configuration_column(rows, ps, self.cardinalities)
            total += np.log(self.theta[i][cfg, rows[:, i]])
        return total

    def sample(self, n_samples: int, rng: np.random.Generator) -> np.ndarray:
        return pls_sample(self, n_samples, rng).rows


def estimate_parameters(structure: DagStructure, data: Dataset) -> BayesianNetwork:
    """CPTs from the posterior-mean estimate (N_ijk + 1) / (N_ij + r_i)."""
    stats = count_stats(structure, data)
    theta = []
    for i in range(structure.n):
        c = stats.counts[i].astype(float)
        r = c.shape[1]
        theta.append((c + 1.0) / (c.sum(axis=1, keepdims=True) + r))
    return BayesianNetwork(structure, theta, data.cardinalities)


def pls_sample(net: BayesianNetwork, n_samples: int, rng: np.random.Generator) -> Dataset:
    """Forward-sample ``n_samples`` rows in ancestral order.

    Exactly one uniform draw per gene: a (n_samples, n) block is drawn up
    front and each gene is decoded by inverse CDF against its CPT row.
    """
    u = rng.random((n_samples, net.n))
    out = np.zeros((n_samples, net.n), dtype=np.int64)
    for i in net.order:
        ps = net.structure.parents[i]
        cfg = configuration_column(out, ps, net.cardinalities)
        cdf = net._cdf[i][cfg]  # (N, r)
        # last column of the cdf is 1 up to rounding; never compare against it
        out[:, i] = (u[:, i, None] >= cdf[:, :-1]).sum(axis=1)
    return Dataset(out, net.cardinalities)


def dump_network(net: BayesianNetwork) -> str:
    """One line per variable: ``X<i> | <parents> | <cpt rows separated by ;>``."""
    lines = []
    for i in range(net.n):
        ps = ",".join(str(p) for p in net.structure.parents[i]) or "-"
        rows = " ; ".join(" ".join(f"{v:.6f}" for v in row) for row in net.theta[i])
        lines.append(f"X{i} | {ps} | {rows}")
    return "\n".join(lines) + "\n"


def load_network(text: str, cardinalities=None) -> BayesianNetwork:
    """Inverse of :func:`dump_network` (CPT rows are renormalised after rounding)."""
    parents, theta = [], []
    for line in text.strip().splitlines():
        _, ps, rows = (part.strip() for part in line.split("|"))
        parents.append(() if ps == "-" else tuple(int(p) for p in ps.split(",")))
        t = np.array([[float(v) for v in row.split()] for row in rows.split(";")])
        theta.append(t / t.sum(axis=1, keepdims=True))
    if cardinalities is None:
        cardinalities = [t.shape[1] for t in theta]
    return BayesianNetwork(DagStructure(len(parents), parents), theta, cardinalities)
