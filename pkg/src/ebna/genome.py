"""Population representation, the objective interface and truncation selection.

Populations are stored as a gene matrix plus a fitness vector so that
evaluation and selection stay vectorised; :class:`Individual` is a light view
used where a single member is handed around.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

GENE_DTYPE = np.uint8

MAXIMIZE = "maximize"
MINIMIZE = "minimize"


class InvalidIndividualError(ValueError):
    """A gene lies outside its variable's cardinality."""


class UnevaluatedError(RuntimeError):
    """Selection was asked to rank members that have no fitness yet."""


@dataclass
class Individual:
    genes: np.ndarray
    fitness: Optional[float] = None

    def __len__(self) -> int:
        return len(self.genes)


@dataclass
class Dataset:
    """N rows of discrete gene values plus the cardinality of each column."""

    rows: np.ndarray
    cardinalities: np.ndarray

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.int64)
        if self.rows.ndim == 1:
            self.rows = self.rows.reshape(-1, len(self.cardinalities))
        self.cardinalities = np.asarray(self.cardinalities, dtype=np.int64)
        if self.rows.shape[1] != len(self.cardinalities):
            raise ValueError(
                f"rows have {self.rows.shape[1]} columns but "
                f"{len(self.cardinalities)} cardinalities were given"
            )

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def n_vars(self) -> int:
        return self.rows.shape[1]

    def __len__(self) -> int:
        return self.n_rows


@dataclass
class Objective:
    """What an optimiser needs to know about a problem.

    ``batch`` evaluates a whole gene matrix at once; ``func`` evaluates a
    single gene vector. Either may be omitted, the other is derived.
    """

    name: str
    dimension: int
    cardinalities: np.ndarray
    direction: str = MAXIMIZE
    known_optimum: Optional[float] = None
    func: Optional[Callable[[np.ndarray], float]] = None
    batch: Optional[Callable[[np.ndarray], np.ndarray]] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.cardinalities = np.asarray(self.cardinalities, dtype=np.int64)
        if len(self.cardinalities) != self.dimension:
            raise ValueError("cardinalities length must equal dimension")
        if np.any(self.cardinalities < 2):
            raise ValueError("every cardinality must be at least 2")
        if self.direction not in (MAXIMIZE, MINIMIZE):
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.func is None and self.batch is None:
            raise ValueError("objective needs func or batch")

    @property
    def maximize(self) -> bool:
        return self.direction == MAXIMIZE

    def __call__(self, genes) -> float:
        genes = np.asarray(genes)
        if self.func is not None:
            return float(self.func(genes))
        return float(self.batch(genes[None, :])[0])

    def evaluate_matrix(self, genes: np.ndarray) -> np.ndarray:
        check_bounds(genes, self.cardinalities)
        if self.batch is not None:
            return np.asarray(self.batch(genes), dtype=float)
        return np.array([self.func(g) for g in genes], dtype=float)

    def better(self, a: float, b: float) -> bool:
        """True if ``a`` is strictly better than ``b``."""
        return a > b if self.maximize else a < b

    def reached_optimum(self, value: float, tol: float = 1e-9) -> bool:
        if self.known_optimum is None:
            return False
        if self.maximize:
            return value >= self.known_optimum - tol
        return value <= self.known_optimum + tol


def check_bounds(genes: np.ndarray, cardinalities: np.ndarray) -> None:
    genes = np.asarray(genes)
    if genes.shape[-1] != len(cardinalities):
        raise InvalidIndividualError(
            f"individual has {genes.shape[-1]} genes, expected {len(cardinalities)}"
        )
    if np.any(genes < 0) or np.any(genes >= cardinalities):
        raise InvalidIndividualError("gene value outside its cardinality range")


class Population:
    """N individuals of one generation.

    ``fitness`` holds NaN for members that have not been evaluated yet.
    """

    def __init__(self, genes, generation_index: int = 0, fitness=None):
        self.genes = np.ascontiguousarray(genes, dtype=GENE_DTYPE)
        if self.genes.ndim != 2:
            raise ValueError("population genes must be a 2-D matrix")
        if fitness is None:
            fitness = np.full(len(self.genes), np.nan)
        self.fitness = np.asarray(fitness, dtype=float)
        self.generation_index = generation_index

    @classmethod
    def from_individuals(cls, members: Sequence[Individual], generation_index: int = 0):
        genes = np.array([m.genes for m in members])
        fit = [np.nan if m.fitness is None else m.fitness for m in members]
        return cls(genes, generation_index, fit)

    def __len__(self) -> int:
        return len(self.genes)

    def __getitem__(self, idx: int) -> Individual:
        f = self.fitness[idx]
        return Individual(self.genes[idx].copy(), None if np.isnan(f) else float(f))

    @property
    def members(self) -> list[Individual]:
        return [self[i] for i in range(len(self))]

    @property
    def evaluated(self) -> bool:
        return not np.any(np.isnan(self.fitness))


def evaluate_population(pop: Population, obj: Objective) -> int:
    """Fill in missing fitness values in place.

    Returns the number of objective calls made, i.e. the number of members
    that were unevaluated on entry. Members with a cached fitness are skipped.
    """
    check_bounds(pop.genes, obj.cardinalities)
    todo = np.isnan(pop.fitness)
    count = int(todo.sum())
    if count:
        pop.fitness[todo] = obj.evaluate_matrix(pop.genes[todo])
    return count


def truncation_order(fitness: np.ndarray, direction: str) -> np.ndarray:
    """Indices from best to worst; equal fitness keeps position order."""
    fitness = np.asarray(fitness, dtype=float)
    key = -fitness if direction == MAXIMIZE else fitness
    return np.argsort(key, kind="stable")


def truncation_select(pop: Population, n_selected: int, direction: str,
                      cardinalities=None) -> Dataset:
    if not 0 < n_selected <= len(pop):
        raise ValueError(f"need 0 < Se <= N, got Se={n_selected}, N={len(pop)}")
    if not pop.evaluated:
        raise UnevaluatedError("all members must be evaluated before selection")
    idx = truncation_order(pop.fitness, direction)[:n_selected]
    if cardinalities is None:
        cardinalities = np.full(pop.genes.shape[1], 2)
    return Dataset(pop.genes[idx], cardinalities)
