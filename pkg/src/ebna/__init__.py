"""Estimation of distribution algorithms built on discrete Bayesian networks."""
from .bayesnet import (BayesianNetwork, DagStructure, ancestral_ordering, count_stats,
                       estimate_parameters, pls_sample)
from .benchmarks import make_objective
from .eda import ModelBuilder, RunRecord, StopSpec, eda_run
from .ga import GaConfig, ga_run
from .genome import Dataset, Individual, Objective, Population
from .rankstats import kruskal_wallis, pairwise_rank_grouping
from .scores import PenaltySpec, parent_bound, score_structure
from .structure import algorithm_b, local_search, pc_learn

__all__ = [
    "BayesianNetwork", "DagStructure", "Dataset", "GaConfig", "Individual", "ModelBuilder",
    "Objective", "PenaltySpec", "Population", "RunRecord", "StopSpec", "algorithm_b",
    "ancestral_ordering", "count_stats", "eda_run", "estimate_parameters", "ga_run",
    "kruskal_wallis", "local_search", "make_objective", "pairwise_rank_grouping",
    "parent_bound", "pc_learn", "pls_sample", "score_structure",
]
