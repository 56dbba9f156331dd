"""Steady-state GA in the GENITOR style: linear ranking, one child per step,
worst-individual replacement."""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .eda import (STOP_BUDGET, STOP_OPTIMUM, STOP_STAGNATION, GenerationStats,
                  RunRecord, StopSpec)
from .genome import Individual, Objective, Population, truncation_order


@dataclass
class GaConfig:
    pop_size: int = 100
    mutation_rate: Optional[float] = None  # None -> 1/n
    bias: float = 1.5

    def __post_init__(self):
        if self.pop_size < 2:
            raise ValueError("GA population needs at least two members")
        if self.mutation_rate is not None and not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation rate must lie in [0, 1]")
        if not 1.0 < self.bias <= 2.0:
            raise ValueError("ranking bias must lie in (1, 2]")


def rank_index(size: int, bias: float, u) -> np.ndarray:
    """Linear-ranking inverse CDF: uniform ``u`` to a rank, 0 being the best.

    The selection density falls linearly from ``bias`` at the best rank to
    ``2 - bias`` at the worst.
    """
    u = np.asarray(u, dtype=float)
    if bias <= 1.0 + 1e-12:
        pos = u
    else:
        pos = (bias - np.sqrt(bias * bias - 4.0 * (bias - 1.0) * u)) / (2.0 * (bias - 1.0))
    return np.minimum((size * pos).astype(np.int64), size - 1)


def rank_probabilities(size: int, bias: float) -> np.ndarray:
    """Exact probability of each rank under :func:`rank_index`."""
    y = np.arange(size + 1) / size
    cdf = bias * y - (bias - 1.0) * y * y
    return np.diff(cdf)


def rank_select(pop: Population, bias: float, rng: np.random.Generator,
                direction: str = "maximize") -> Individual:
    """Draw one member of ``pop`` by linear ranking on its fitness."""
    order = truncation_order(pop.fitness, direction)
    return pop[int(order[rank_index(len(pop), bias, rng.random())])]


def one_point_crossover(a: np.ndarray, b: np.ndarray, cut: int) -> np.ndarray:
    return np.concatenate([a[:cut], b[cut:]])


def mutate(genes: np.ndarray, cardinalities: np.ndarray, rate: float,
           rng: np.random.Generator) -> np.ndarray:
    """Replace each gene with probability ``rate`` by a different value."""
    out = genes.copy()
    hit = rng.random(len(genes)) < rate
    if hit.any():
        idx = np.flatnonzero(hit)
        r = cardinalities[idx]
        shift = 1 + (rng.random(len(idx)) * (r - 1)).astype(np.int64)
        out[idx] = (out[idx] + shift) % r
    return out


def ga_run(obj: Objective, cfg: GaConfig, stop: StopSpec, seed: int,
           initial: Optional[np.ndarray] = None) -> RunRecord:
    """Run the steady-state GA; one objective evaluation per step.

    A trace row is written after the initial population and after every
    further ``pop_size`` evaluations; the stagnation test compares the
    population mean across those checkpoints.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    n, N = obj.dimension, cfg.pop_size
    card = obj.cardinalities
    rate = 1.0 / n if cfg.mutation_rate is None else cfg.mutation_rate
    optimum = stop.optimum if stop.optimum is not None else obj.known_optimum
    record = RunRecord("ga", obj.name, seed,
                       {"pop_size": N, "mutation_rate": rate, "bias": cfg.bias,
                        "stop": asdict(stop)})

    if initial is None:
        genes = (rng.random((N, n)) * card).astype(np.int64)
    else:
        genes = np.array(initial, dtype=np.int64)
    fitness = obj.evaluate_matrix(genes)
    evaluations = N
    sign = 1.0 if obj.maximize else -1.0
    # keep members sorted best first
    order = np.argsort(-sign * fitness, kind="stable")
    genes, fitness = genes[order], fitness[order]

    def reached(v):
        return optimum is not None and sign * (v - optimum) >= -1e-9

    prev_mean = None
    checkpoint = 0
    steps = 0
    reason = None
    while True:
        if evaluations >= checkpoint + N or not record.trace:
            checkpoint = evaluations
            mean = float(fitness.mean())
            record.trace.append(GenerationStats(len(record.trace), float(fitness[0]), mean,
                                                float(fitness[0]), evaluations, 0, "genitor"))
            if (stop.stagnation_epsilon is not None and prev_mean is not None
                    and abs(mean - prev_mean) < stop.stagnation_epsilon):
                reason = STOP_STAGNATION
            prev_mean = mean
        if reached(fitness[0]):
            reason = STOP_OPTIMUM
        elif stop.max_evaluations is not None and evaluations >= stop.max_evaluations:
            reason = STOP_BUDGET
        if reason:
            break

        i, j = rank_index(N, cfg.bias, rng.random(2))
        cut = int(rng.integers(1, n)) if n > 1 else 0
        child = one_point_crossover(genes[i], genes[j], cut)
        child = mutate(child, card, rate, rng)
        value = float(obj.evaluate_matrix(child[None, :])[0])
        evaluations += 1
        steps += 1
        if sign * (value - fitness[-1]) > 0:
            # insert after every member at least as good (stable order)
            pos = int(np.searchsorted(-sign * fitness, -sign * value, side="right"))
            genes = np.insert(genes[:-1], pos, child, axis=0)
            fitness = np.insert(fitness[:-1], pos, value)

    if not record.trace or record.trace[-1].evaluations != evaluations:
        record.trace.append(GenerationStats(len(record.trace), float(fitness[0]),
                                            float(fitness.mean()), float(fitness[0]),
                                            evaluations, 0, "genitor"))
    record.final_best = float(fitness[0])
    record.evaluations = evaluations
    record.generations = steps
    record.stop_reason = reason
    record.wall_ms = (time.perf_counter() - t0) * 1000.0
    return record
