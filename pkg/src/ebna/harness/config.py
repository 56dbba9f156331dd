"""Experiment configuration: Table-1 defaults, flat key=value files, seed derivation."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

from ..benchmarks import PROBLEMS, make_objective
from ..eda import STRATEGIES

GA = "ga"
ALGORITHMS = STRATEGIES + (GA,)

DEFAULT_REPS = 10
DEFAULT_STAGNATION = 1e-6


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ProblemConfig:
    name: str
    n: Optional[int] = None
    s: Optional[int] = None
    t_fraction: float = 0.30
    weights_seed: int = 0
    pop_size: int = 512
    budget: int = 100_000

    def objective(self):
        return make_objective(self.name, self.n, s=self.s, t_fraction=self.t_fraction,
                              weights_seed=self.weights_seed)


STANDARD_PROBLEMS = {
    "onemax": ProblemConfig("onemax", n=128, pop_size=512, budget=100_000),
    "checkerboard": ProblemConfig("checkerboard", s=10, pop_size=1000, budget=100_000),
    "sixpeaks": ProblemConfig("sixpeaks", n=50, pop_size=1600, budget=300_000),
    "equalproducts": ProblemConfig("equalproducts", n=50, pop_size=1600, budget=300_000),
}


@dataclass(frozen=True)
class AlgoParams:
    k2_penalty: str = "aic"
    pc_alpha: float = 0.01
    pc_depth: int = 3
    bic_cap: int = 10
    carry_forward: bool = True
    ga_mutation_rate: Optional[float] = None
    ga_bias: float = 1.5


@dataclass
class ExperimentConfig:
    problems: list = field(default_factory=lambda: [STANDARD_PROBLEMS["onemax"]])
    algorithms: list = field(default_factory=lambda: [STRATEGIES[0]])
    reps: int = DEFAULT_REPS
    master_seed: int = 0
    stagnation_epsilon: Optional[float] = DEFAULT_STAGNATION
    elitism: bool = False
    params: AlgoParams = field(default_factory=AlgoParams)
    workers: int = 1
    trace: bool = False

    def cell_id(self, problem: ProblemConfig, algorithm: str) -> str:
        """Short digest of everything that shapes one (problem, algorithm) cell."""
        blob = {"problem": asdict(problem), "algorithm": algorithm,
                "stagnation": self.stagnation_epsilon, "elitism": self.elitism}
        if algorithm == GA:
            blob["ga"] = [self.params.ga_mutation_rate, self.params.ga_bias]
        elif algorithm.startswith("ebna"):
            blob["ebna"] = asdict(self.params)
        text = json.dumps(blob, sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:12]


def derive_seed(master: int, problem: str, algorithm: str, rep: int) -> int:
    text = f"{master}|{problem}|{algorithm}|{rep}".encode()
    return int.from_bytes(hashlib.sha256(text).digest()[:8], "big") >> 1


CONFIG_KEYS = {
    "problem": "comma-separated problem names, or 'table1' for all four",
    "problem.n": "dimension (onemax, sixpeaks, equalproducts)",
    "problem.s": "grid side (checkerboard)",
    "problem.t_fraction": "SixPeaks threshold as a fraction of n (default 0.30)",
    "problem.weights_seed": "EqualProducts weight seed (default 0)",
    "problem.pop_size": "population size N (Se = N/2)",
    "problem.budget": "maximum objective evaluations",
    "algo": "comma-separated algorithms or 'all'",
    "algo.carry_forward": "warm-start EBNA searches from the previous structure",
    "algo.ebna_k2pen.f": "penalty weight: aic, bic or a number",
    "algo.ebna_pc.alpha": "chi-square level for PC (default 0.01)",
    "algo.ebna_pc.depth": "largest PC conditioning set (default 3)",
    "algo.ebna_bic.cap": "hard parent cap for BIC search (default 10)",
    "algo.ga.mutation_rate": "per-gene mutation probability (default 1/n)",
    "algo.ga.bias": "linear ranking bias in (1, 2] (default 1.5)",
    "run.reps": "repetitions per cell (default 10)",
    "run.seed": "master seed (default 0)",
    "run.stagnation_epsilon": "mean-change threshold; 'none' disables (default 1e-6)",
    "run.elitism": "keep the best individual across generations (default false)",
    "run.workers": "worker processes (default: available cores)",
    "run.trace": "also write per-generation traces (default false)",
}


def parse_config_file(path) -> dict:
    """Read ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _opt_float(text):
    if text is None or str(text).lower() == "none":
        return None
    return float(text)


def parse_algorithms(text: str) -> list[str]:
    if text.strip().lower() == "all":
        return list(ALGORITHMS)
    algos = [a.strip().lower().replace("-", "_").replace("+", "") for a in text.split(",") if a.strip()]
    for a in algos:
        if a not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {a!r}; expected one of {', '.join(ALGORITHMS)}")
    return algos


def build_config(values: dict) -> ExperimentConfig:
    """Turn merged key/value settings into an :class:`ExperimentConfig`."""
    if "problem" not in values:
        raise ConfigError("no problem given")
    names = values["problem"]
    names = list(PROBLEMS) if names.strip().lower() == "table1" else [
        p.strip().lower() for p in names.split(",") if p.strip()]
    problems = []
    for name in names:
        if name not in STANDARD_PROBLEMS:
            raise ConfigError(f"unknown problem {name!r}; expected one of {', '.join(PROBLEMS)}")
        p = STANDARD_PROBLEMS[name]
        upd = {}
        for key, attr, conv in (("problem.n", "n", int), ("problem.s", "s", int),
                                ("problem.t_fraction", "t_fraction", float),
                                ("problem.weights_seed", "weights_seed", int),
                                ("problem.pop_size", "pop_size", int),
                                ("problem.budget", "budget", int)):
            if values.get(key) is not None:
                upd[attr] = conv(values[key])
        if name == "checkerboard" and "n" in upd:
            upd["s"] = None
        elif name == "checkerboard" and "s" in upd:
            upd["n"] = None
        p = replace(p, **upd)
        try:
            p.objective()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if p.pop_size < 2:
            raise ConfigError("population size must be at least 2")
        problems.append(p)

    params = AlgoParams(
        k2_penalty=values.get("algo.ebna_k2pen.f", "aic"),
        pc_alpha=float(values.get("algo.ebna_pc.alpha", 0.01)),
        pc_depth=int(values.get("algo.ebna_pc.depth", 3)),
        bic_cap=int(values.get("algo.ebna_bic.cap", 10)),
        carry_forward=_bool(values.get("algo.carry_forward", "true")),
        ga_mutation_rate=_opt_float(values.get("algo.ga.mutation_rate")),
        ga_bias=float(values.get("algo.ga.bias", 1.5)),
    )
    workers = values.get("run.workers")
    if workers is None:
        import os
        workers = len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count()
    return ExperimentConfig(
        problems=problems,
        algorithms=parse_algorithms(values.get("algo", "umda")),
        reps=int(values.get("run.reps", DEFAULT_REPS)),
        master_seed=int(values.get("run.seed", 0)),
        stagnation_epsilon=_opt_float(values.get("run.stagnation_epsilon", DEFAULT_STAGNATION)),
        elitism=_bool(values.get("run.elitism", "false")),
        params=params,
        workers=max(1, int(workers)),
        trace=_bool(values.get("run.trace", "false")),
    )
