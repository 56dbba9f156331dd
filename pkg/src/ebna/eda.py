"""The EDA loop and its model builders (UMDA, MIMIC and the three EBNA variants)."""
from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .bayesnet import (BayesianNetwork, DagStructure, estimate_parameters,
                       pls_sample)
from .genome import Dataset, Objective, Population, evaluate_population, truncation_select
from .scores import AIC, BIC, K2PEN, PenaltySpec, parent_bounds
from .structure import DEFAULT_BIC_CAP, DEFAULT_PC_DEPTH, algorithm_b, local_search, pc_learn

log = logging.getLogger(__name__)

UMDA = "umda"
MIMIC = "mimic"
EBNA_PC = "ebna_pc"
EBNA_BIC = "ebna_bic"
EBNA_K2PEN = "ebna_k2pen"
STRATEGIES = (UMDA, MIMIC, EBNA_PC, EBNA_BIC, EBNA_K2PEN)

STOP_OPTIMUM = "optimum"
STOP_BUDGET = "budget"
STOP_STAGNATION = "stagnation"


@dataclass
class StopSpec:
    max_evaluations: Optional[int] = 100_000
    stagnation_epsilon: Optional[float] = 1e-6
    optimum: Optional[float] = None

    def __post_init__(self):
        if self.max_evaluations is None and self.stagnation_epsilon is None and self.optimum is None:
            raise ValueError("at least one stopping criterion must be active")


@dataclass
class GenerationStats:
    generation: int
    best: float
    mean: float
    pop_best: float
    evaluations: int
    arcs: int
    learner: str


@dataclass
class RunRecord:
    algorithm: str
    problem: str
    seed: int
    config: dict
    trace: list = field(default_factory=list)
    final_best: float = float("nan")
    best_genes: Optional[list] = None
    evaluations: int = 0
    generations: int = 0
    stop_reason: str = ""
    wall_ms: float = 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["trace"] = [asdict(g) if not isinstance(g, dict) else g for g in self.trace]
        return d

    def deterministic_view(self) -> dict:
        d = self.to_dict()
        d.pop("wall_ms")
        return d


# --- entropies and MIMIC --------------------------------------------------------

def _plugin_entropy(counts: np.ndarray) -> float:
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log(p)).sum())


def empirical_entropy(data: Dataset, i: int) -> float:
    return _plugin_entropy(np.bincount(data.rows[:, i], minlength=int(data.cardinalities[i])))


def empirical_conditional_entropy(data: Dataset, i: int, given: int) -> float:
    """h(X_i | X_given) = h(X_i, X_given) - h(X_given)."""
    r_i = int(data.cardinalities[i])
    joint = np.bincount(data.rows[:, given] * r_i + data.rows[:, i],
                        minlength=int(data.cardinalities[given]) * r_i)
    return _plugin_entropy(joint) - empirical_entropy(data, given)


def mimic_permutation(data: Dataset) -> tuple[list[int], float]:
    """Greedy MIMIC ordering.

    Returns the variables in the order they were picked (the chain's root
    first) and the entropy sum of the resulting chain. Ties go to the
    lowest variable index.
    """
    n = data.n_vars
    rows, card = data.rows, data.cardinalities
    N = data.n_rows
    offsets = np.concatenate(([0], np.cumsum(card)))
    onehot = np.zeros((N, int(offsets[-1])))
    for v in range(n):
        onehot[np.arange(N), offsets[v] + rows[:, v]] = 1.0
    joint = onehot.T @ onehot
    single = np.array([empirical_entropy(data, v) for v in range(n)])

    def cond_entropies(given: int, candidates: list[int]) -> np.ndarray:
        blk = joint[offsets[given]:offsets[given + 1]]
        out = np.empty(len(candidates))
        for k, v in enumerate(candidates):
            out[k] = _plugin_entropy(blk[:, offsets[v]:offsets[v + 1]]) - single[given]
        return out

    first = int(np.argmin(single))
    order = [first]
    total = single[first]
    left = [v for v in range(n) if v != first]
    while left:
        h = cond_entropies(order[-1], left)
        k = int(np.argmin(h))
        total += h[k]
        order.append(left.pop(k))
    return order, float(total)


def build_umda(selected: Dataset) -> BayesianNetwork:
    return estimate_parameters(DagStructure(selected.n_vars), selected)


def build_mimic(selected: Dataset) -> BayesianNetwork:
    order, _ = mimic_permutation(selected)
    parents = [() for _ in range(selected.n_vars)]
    for prev, cur in zip(order, order[1:]):
        parents[cur] = (prev,)
    return estimate_parameters(DagStructure(selected.n_vars, parents), selected)


# --- model builders -------------------------------------------------------------

@dataclass
class ModelBuilder:
    """How a generation's model is learnt from the selected individuals.

    ``carry_forward`` warm-starts the BIC and K2+pen searches from the
    previous generation's structure; the first model always comes from
    greedy arc addition.
    """

    strategy: str = EBNA_BIC
    carry_forward: bool = True
    penalty: PenaltySpec = AIC
    pc_alpha: float = 0.01
    pc_depth: int = DEFAULT_PC_DEPTH
    bic_cap: int = DEFAULT_BIC_CAP

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")

    def build(self, selected: Dataset, prev: Optional[DagStructure] = None
              ) -> tuple[BayesianNetwork, str]:
        """Return the learnt network and a tag naming the learner used."""
        s = self.strategy
        if s == UMDA:
            return build_umda(selected), "marginals"
        if s == MIMIC:
            return build_mimic(selected), "mimic_chain"
        if s == EBNA_PC:
            return build_ebna(selected, "pc", alpha=self.pc_alpha, depth=self.pc_depth), "pc"
        variant = "bic" if s == EBNA_BIC else "k2pen"
        seed_structure = prev if self.carry_forward else None
        net = build_ebna(selected, variant, seed_structure, penalty=self.penalty,
                         bic_cap=self.bic_cap)
        return net, "algorithm_b" if seed_structure is None else "local_search"

    def describe(self) -> dict:
        return {"strategy": self.strategy, "carry_forward": self.carry_forward,
                "penalty": f"{self.penalty.kind}:{self.penalty.value}",
                "pc_alpha": self.pc_alpha, "pc_depth": self.pc_depth,
                "bic_cap": self.bic_cap}


def build_ebna(selected: Dataset, variant: str, prev: Optional[DagStructure] = None, *,
               penalty: PenaltySpec = AIC, alpha: float = 0.01,
               depth: int = DEFAULT_PC_DEPTH, bic_cap: int = DEFAULT_BIC_CAP) -> BayesianNetwork:
    if variant == "pc":
        structure = pc_learn(selected, alpha, depth)
    elif variant in ("bic", "k2pen"):
        if variant == "bic":
            metric, caps = BIC, bic_cap
        else:
            metric = K2PEN
            caps = parent_bounds(selected.cardinalities, selected.n_rows, penalty)
        if prev is None:
            structure = algorithm_b(selected, metric, caps, penalty)
        else:
            structure = local_search(selected, metric, prev, caps, penalty)
    else:
        raise ValueError(f"unknown EBNA variant {variant!r}")
    return estimate_parameters(structure, selected)


# --- the loop ---------------------------------------------------------------------

def eda_run(obj: Objective, builder: ModelBuilder, pop_size: int, n_selected: int,
            stop: StopSpec, seed: int, *, elitism: bool = False,
            record_genes: bool = False) -> RunRecord:
    """Run one EDA until a stopping criterion fires.

    Generation 0 is sampled from the uniform model. Each later generation
    truncation-selects ``n_selected`` rows, learns a model from them and
    samples a full new population from it (one elite kept when
    ``elitism``). The stagnation test fires when the population mean moves
    by less than ``stop.stagnation_epsilon`` between generations.
    """
    if not 0 < n_selected <= pop_size:
        raise ValueError("need 0 < Se <= N")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    card = obj.cardinalities
    optimum = stop.optimum if stop.optimum is not None else obj.known_optimum
    record = RunRecord(builder.strategy, obj.name, seed,
                       {"pop_size": pop_size, "n_selected": n_selected, "elitism": elitism,
                        "stop": asdict(stop), **builder.describe()})

    model = BayesianNetwork.uniform(card)
    pop = Population(pls_sample(model, pop_size, rng).rows, 0)
    evaluations = evaluate_population(pop, obj)
    best_val, best_genes = None, None
    prev_mean = None
    structure = None
    learner = "uniform"

    def better(a, b):
        return b is None or obj.better(a, b)

    while True:
        i_best = int(np.argmax(pop.fitness) if obj.maximize else np.argmin(pop.fitness))
        if better(pop.fitness[i_best], best_val):
            best_val, best_genes = float(pop.fitness[i_best]), pop.genes[i_best].copy()
        mean = float(pop.fitness.mean())
        record.trace.append(GenerationStats(pop.generation_index, best_val, mean,
                                            float(pop.fitness[i_best]), evaluations,
                                            model.structure.n_arcs, learner))
        reason = None
        if optimum is not None and (best_val >= optimum - 1e-9 if obj.maximize
                                    else best_val <= optimum + 1e-9):
            reason = STOP_OPTIMUM
        elif stop.max_evaluations is not None and evaluations >= stop.max_evaluations:
            reason = STOP_BUDGET
        elif (stop.stagnation_epsilon is not None and prev_mean is not None
              and abs(mean - prev_mean) < stop.stagnation_epsilon):
            reason = STOP_STAGNATION
        if reason:
            break
        prev_mean = mean

        selected = truncation_select(pop, n_selected, obj.direction, card)
        model, learner = builder.build(selected, structure)
        structure = model.structure
        n_new = pop_size - 1 if elitism else pop_size
        genes = pls_sample(model, n_new, rng).rows
        fitness = np.full(n_new, np.nan)
        if elitism:
            genes = np.vstack([pop.genes[i_best][None, :], genes])
            fitness = np.concatenate([[pop.fitness[i_best]], fitness])
        pop = Population(genes, pop.generation_index + 1, fitness)
        evaluations += evaluate_population(pop, obj)

    record.final_best = best_val
    record.best_genes = [int(g) for g in best_genes] if record_genes else None
    record.evaluations = evaluations
    record.generations = pop.generation_index
    record.stop_reason = reason
    record.wall_ms = (time.perf_counter() - t0) * 1000.0
    log.debug("%s on %s seed %d: best %s after %d evaluations (%s)", builder.strategy,
              obj.name, seed, best_val, evaluations, reason)
    return record
