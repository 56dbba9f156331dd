"""Structure learning: greedy arc addition, add/delete hill climbing and PC."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import chi2

from .bayesnet import DagStructure, configuration_column
from .genome import Dataset
from .scores import AIC, BIC, FamilyScorer, PenaltySpec

log = logging.getLogger(__name__)

ADD = "add"
DELETE = "delete"

IMPROVEMENT_TOL = 1e-10
DEFAULT_BIC_CAP = 10
DEFAULT_PC_DEPTH = 3


@dataclass(frozen=True)
class ArcEdit:
    kind: str
    source: int
    target: int
    score_delta: float


@dataclass
class SearchResult:
    structure: DagStructure
    score: float
    edits: list = field(default_factory=list)
    trace: list = field(default_factory=list)


def _caps(bound, n: int) -> np.ndarray:
    if bound is None:
        return np.full(n, n - 1)
    if np.isscalar(bound):
        return np.full(n, int(bound))
    caps = np.asarray(bound, dtype=int)
    if len(caps) != n:
        raise ValueError("need one parent cap per variable")
    return caps


def _reaches(children: list[set], start: int, goal: int) -> bool:
    stack, seen = [start], {start}
    while stack:
        v = stack.pop()
        if v == goal:
            return True
        for c in children[v]:
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return False


def hill_climb(data: Dataset, metric: str = BIC, initial: Optional[DagStructure] = None,
               bound=None, pen: PenaltySpec = AIC, allow_delete: bool = True,
               scorer: Optional[FamilyScorer] = None) -> SearchResult:
    """Best-improvement search over single arc additions (and deletions).

    Each step applies the edit with the largest score increase; equal
    increases go to the lowest ``(source, target)`` pair. Stops when no
    edit improves the score by more than ``IMPROVEMENT_TOL``.
    """
    n = data.n_vars
    scorer = scorer or FamilyScorer(data, metric, pen)
    caps = _caps(bound, n)
    parents = [list(ps) for ps in (initial.parents if initial is not None else [()] * n)]
    children = [set() for _ in range(n)]
    for i, ps in enumerate(parents):
        for p in ps:
            children[p].add(i)

    current = np.array([scorer.family(i, ps) for i, ps in enumerate(parents)])
    # delta[target, source]: score change of toggling arc source -> target
    delta = np.full((n, n), -np.inf)

    def refresh(i: int):
        row = np.full(n, -np.inf)
        if len(parents[i]) < caps[i]:
            adds = scorer.add_candidates(i, parents[i]) - current[i]
            ok = ~np.isnan(adds)
            row[ok] = adds[ok]
        if allow_delete:
            for p in parents[i]:
                rest = [q for q in parents[i] if q != p]
                row[p] = scorer.family(i, rest) - current[i]
        row[i] = -np.inf
        delta[i] = row

    for i in range(n):
        refresh(i)

    result = SearchResult(DagStructure(n, parents), float(current.sum()))
    result.trace.append(result.score)
    blocked = np.zeros((n, n), dtype=bool)
    while True:
        masked = np.where(blocked, -np.inf, delta).T  # [source, target]
        k = int(np.argmax(masked))
        src, tgt = divmod(k, n)
        best = masked[src, tgt]
        if not best > IMPROVEMENT_TOL:
            break
        is_add = src not in parents[tgt]
        if is_add and _reaches(children, tgt, src):
            blocked[tgt, src] = True
            continue
        if is_add:
            parents[tgt].append(src)
            parents[tgt].sort()
            children[src].add(tgt)
        else:
            parents[tgt].remove(src)
            children[src].discard(tgt)
            blocked[:] = False
        current[tgt] = scorer.family(tgt, parents[tgt])
        refresh(tgt)
        result.edits.append(ArcEdit(ADD if is_add else DELETE, src, tgt, float(best)))
        result.trace.append(float(current.sum()))

    result.structure = DagStructure(n, parents)
    result.score = float(current.sum())
    return result


def algorithm_b(data: Dataset, metric: str = BIC, bound=None, pen: PenaltySpec = AIC,
                scorer: Optional[FamilyScorer] = None) -> DagStructure:
    """Greedy arc addition from the empty graph."""
    return hill_climb(data, metric, None, bound, pen, allow_delete=False,
                      scorer=scorer).structure


def local_search(data: Dataset, metric: str = BIC, initial: Optional[DagStructure] = None,
                 bound=None, pen: PenaltySpec = AIC,
                 scorer: Optional[FamilyScorer] = None) -> DagStructure:
    """Add/delete hill climbing started from ``initial`` (empty graph if omitted)."""
    return hill_climb(data, metric, initial, bound, pen, allow_delete=True,
                      scorer=scorer).structure


# --- conditional independence -------------------------------------------------

@dataclass
class CiTestResult:
    pair: tuple
    conditioning: tuple
    statistic: float
    degrees_of_freedom: int
    p_value: float
    independent: bool
    sparse_strata: int = 0


def _stratum_chi2(table: np.ndarray) -> tuple[float, int, bool]:
    """Pearson statistic and df of one contingency table, empty rows/cols dropped."""
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    if table.shape[0] < 2 or table.shape[1] < 2:
        return 0.0, 0, False
    total = table.sum()
    expected = np.outer(table.sum(axis=1), table.sum(axis=0)) / total
    stat = float(((table - expected) ** 2 / expected).sum())
    df = (table.shape[0] - 1) * (table.shape[1] - 1)
    sparse = (expected < 5).mean() > 0.2
    return stat, df, bool(sparse)


def chi_square_ci_test(data: Dataset, i: int, j: int, cond: Sequence[int] = (),
                       alpha: float = 0.01) -> CiTestResult:
    """Pearson chi-square test of X_i independent of X_j given X_cond.

    Statistics and degrees of freedom are summed over the strata of the
    conditioning set. Strata, rows or columns with no observations are
    dropped along with their degrees of freedom; with no degrees of freedom
    left the variables are reported independent.
    """
    cond = tuple(cond)
    if i == j or i in cond or j in cond:
        raise ValueError("test variables must be distinct and outside the conditioning set")
    rows, card = data.rows, data.cardinalities
    r_i, r_j = int(card[i]), int(card[j])
    cfg = configuration_column(rows, cond, card)
    q = int(np.prod([card[c] for c in cond])) if cond else 1
    key = (cfg * r_i + rows[:, i]) * r_j + rows[:, j]
    tables = np.bincount(key, minlength=q * r_i * r_j).reshape(q, r_i, r_j)
    stat, df, sparse = 0.0, 0, 0
    for t in tables:
        if t.sum() == 0:
            continue
        s, d, sp = _stratum_chi2(t)
        stat += s
        df += d
        sparse += sp
    p = float(chi2.sf(stat, df)) if df > 0 else 1.0
    return CiTestResult((i, j), cond, stat, df, p, p > alpha, sparse)


def _pairwise_independence(data: Dataset, alpha: float) -> tuple[np.ndarray, int]:
    """Marginal chi-square tests for all pairs at once. Returns (independent, sparse_count)."""
    rows, card = data.rows, data.cardinalities
    n, N = data.n_vars, data.n_rows
    offsets = np.concatenate(([0], np.cumsum(card)))
    onehot = np.zeros((N, int(offsets[-1])))
    for v in range(n):
        onehot[np.arange(N), offsets[v] + rows[:, v]] = 1.0
    joint = onehot.T @ onehot
    indep = np.ones((n, n), dtype=bool)
    sparse = 0
    for a in range(n):
        for b in range(a + 1, n):
            t = joint[offsets[a]:offsets[a + 1], offsets[b]:offsets[b + 1]]
            s, d, sp = _stratum_chi2(t)
            sparse += sp
            p = float(chi2.sf(s, d)) if d > 0 else 1.0
            indep[a, b] = indep[b, a] = p > alpha
    return indep, sparse


@dataclass
class PcResult:
    structure: DagStructure
    skeleton: set
    sepsets: dict
    tests: int = 0
    sparse_strata: int = 0


def _orient(n: int, adj: list[set], sepsets: dict) -> DagStructure:
    """Turn a skeleton plus separating sets into a DAG.

    v-structures first, then Meek rules 1-3, then any remaining undirected
    edges follow a lowest-index-first topological order of the directed part.
    """
    directed: set[tuple[int, int]] = set()

    def oriented(a, b):
        return (a, b) in directed or (b, a) in directed

    # v-structures a -> c <- b for non-adjacent a, b with c outside their sepset
    for c in range(n):
        nbrs = sorted(adj[c])
        for a, b in itertools.combinations(nbrs, 2):
            if b in adj[a]:
                continue
            if c in sepsets.get((a, b), ()):
                continue
            for x in (a, b):
                if not oriented(x, c):
                    directed.add((x, c))

    def undirected(a, b):
        return b in adj[a] and not oriented(a, b)

    changed = True
    while changed:
        changed = False
        for a in range(n):
            for b in sorted(adj[a]):
                if not undirected(a, b):
                    continue
                # R1: c -> a - b, c and b non-adjacent  =>  a -> b
                r1 = any((c, a) in directed and b not in adj[c] and c != b for c in range(n))
                # R2: a -> c -> b  =>  a -> b
                r2 = any((a, c) in directed and (c, b) in directed for c in adj[a] & adj[b])
                # R3: a - c -> b, a - d -> b, c and d non-adjacent  =>  a -> b
                r3 = False
                cands = [c for c in adj[a] & adj[b] if undirected(a, c) and (c, b) in directed]
                for c, d in itertools.combinations(cands, 2):
                    if d not in adj[c]:
                        r3 = True
                        break
                if r1 or r2 or r3:
                    directed.add((a, b))
                    changed = True

    # order the nodes: lowest index whose directed parents are all placed;
    # if directed arcs happen to form a cycle, fall back to the lowest index
    placed: list[int] = []
    remaining = set(range(n))
    while remaining:
        ready = [v for v in sorted(remaining)
                 if not any((u, v) in directed for u in remaining if u != v)]
        v = ready[0] if ready else min(remaining)
        placed.append(v)
        remaining.discard(v)
    pos = {v: k for k, v in enumerate(placed)}
    parents = [[] for _ in range(n)]
    for a in range(n):
        for b in adj[a]:
            if pos[a] < pos[b]:
                parents[b].append(a)
    return DagStructure(n, parents)


def pc_search(data: Dataset, alpha: float = 0.01, max_depth: int = DEFAULT_PC_DEPTH) -> PcResult:
    n = data.n_vars
    indep, sparse = _pairwise_independence(data, alpha)
    tests = n * (n - 1) // 2
    adj = [set(np.flatnonzero(~indep[a])) - {a} for a in range(n)]
    adj = [set(int(b) for b in s) for s in adj]
    sepsets: dict[tuple[int, int], tuple] = {}
    for a in range(n):
        for b in range(a + 1, n):
            if indep[a, b]:
                sepsets[(a, b)] = sepsets[(b, a)] = ()

    depth = 1
    while depth <= max_depth:
        if not any(len(adj[a]) - 1 >= depth for a in range(n)):
            break
        for a in range(n):
            for b in sorted(adj[a]):
                if b not in adj[a]:
                    continue
                # conditioning sets drawn from the neighbours of a, then of b
                found = None
                for base in (a, b):
                    other = b if base == a else a
                    pool = sorted(adj[base] - {other})
                    if len(pool) < depth:
                        continue
                    for cond in itertools.combinations(pool, depth):
                        res = chi_square_ci_test(data, min(a, b), max(a, b), cond, alpha)
                        tests += 1
                        sparse += res.sparse_strata
                        if res.independent:
                            found = cond
                            break
                    if found is not None:
                        break
                if found is not None:
                    adj[a].discard(b)
                    adj[b].discard(a)
                    sepsets[(a, b)] = sepsets[(b, a)] = found
        depth += 1

    skeleton = {(a, b) for a in range(n) for b in adj[a] if a < b}
    if sparse:
        log.debug("PC: %d sparse chi-square strata", sparse)
    return PcResult(_orient(n, adj, sepsets), skeleton, sepsets, tests, sparse)


def pc_learn(data: Dataset, alpha: float = 0.01, max_depth: int = DEFAULT_PC_DEPTH) -> DagStructure:
    return pc_search(data, alpha, max_depth).structure
