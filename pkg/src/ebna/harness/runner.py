"""Scheduling of experiment cells and the results / trace / timing files."""
from __future__ import annotations

import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

from ..eda import ModelBuilder, StopSpec, eda_run, RunRecord
from ..ga import GaConfig, ga_run
from ..scores import PenaltySpec
from .config import GA, ExperimentConfig, ProblemConfig, derive_seed

log = logging.getLogger(__name__)

RESULT_COLUMNS = ("run_id", "problem", "algorithm", "rep", "seed", "final_best",
                  "evaluations", "generations", "stop_reason", "direction",
                  "weights_seed", "config_id")
TRACE_COLUMNS = ("run_id", "generation", "best", "mean", "pop_best", "evaluations",
                 "arcs", "learner")
TIMING_COLUMNS = ("run_id", "wall_ms")
SEP = "\t"
HEADER_PREFIX = "# ebna results"


@dataclass(frozen=True)
class RunSpec:
    run_id: int
    problem: ProblemConfig
    algorithm: str
    rep: int
    seed: int
    config_id: str
    stagnation_epsilon: Optional[float]
    elitism: bool
    params: object


def plan_runs(cfg: ExperimentConfig) -> list[RunSpec]:
    specs = []
    for p in cfg.problems:
        for a in cfg.algorithms:
            cid = cfg.cell_id(p, a)
            for rep in range(cfg.reps):
                specs.append(RunSpec(len(specs), p, a, rep,
                                     derive_seed(cfg.master_seed, p.name, a, rep), cid,
                                     cfg.stagnation_epsilon, cfg.elitism, cfg.params))
    return specs


def execute(spec: RunSpec) -> RunRecord:
    obj = spec.problem.objective()
    stop = StopSpec(spec.problem.budget, spec.stagnation_epsilon)
    N = spec.problem.pop_size
    prm = spec.params
    if spec.algorithm == GA:
        return ga_run(obj, GaConfig(N, prm.ga_mutation_rate, prm.ga_bias), stop, spec.seed)
    builder = ModelBuilder(spec.algorithm, carry_forward=prm.carry_forward,
                           penalty=PenaltySpec.parse(prm.k2_penalty), pc_alpha=prm.pc_alpha,
                           pc_depth=prm.pc_depth, bic_cap=prm.bic_cap)
    return eda_run(obj, builder, N, N // 2, stop, spec.seed, elitism=spec.elitism)


def format_value(x: float) -> str:
    return repr(float(x))


def result_row(spec: RunSpec, rec: RunRecord) -> list[str]:
    obj_dir = "min" if spec.problem.name == "equalproducts" else "max"
    return [str(spec.run_id), spec.problem.name, spec.algorithm, str(spec.rep), str(spec.seed),
            format_value(rec.final_best), str(rec.evaluations), str(rec.generations),
            rec.stop_reason, obj_dir, str(spec.problem.weights_seed), spec.config_id]


def _iter_records(specs: list[RunSpec], workers: int) -> Iterable[RunRecord]:
    if workers <= 1 or len(specs) <= 1:
        for s in specs:
            yield execute(s)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves submission order, so the file layout is deterministic
        yield from pool.map(execute, specs)


def run_experiment(cfg: ExperimentConfig, out_path, progress=sys.stderr) -> list[RunRecord]:
    """Run every cell and write results (plus timing and optional trace files)."""
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    specs = plan_runs(cfg)
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    records = []
    timing_path = out_path.with_name(out_path.name + ".timing.tsv")
    trace_path = out_path.with_name(out_path.name + ".trace.tsv")
    with open(out_path, "w", encoding="utf-8", newline="\n") as res, \
            open(timing_path, "w", encoding="utf-8", newline="\n") as tim:
        tr = open(trace_path, "w", encoding="utf-8", newline="\n") if cfg.trace else None
        try:
            res.write(f"{HEADER_PREFIX} created {stamp}\n")
            res.write(SEP.join(RESULT_COLUMNS) + "\n")
            tim.write(SEP.join(TIMING_COLUMNS) + "\n")
            if tr:
                tr.write(SEP.join(TRACE_COLUMNS) + "\n")
            for k, (spec, rec) in enumerate(zip(specs, _iter_records(specs, cfg.workers)), 1):
                records.append(rec)
                res.write(SEP.join(result_row(spec, rec)) + "\n")
                res.flush()
                tim.write(f"{spec.run_id}{SEP}{rec.wall_ms:.1f}\n")
                if tr:
                    for g in rec.trace:
                        tr.write(SEP.join([str(spec.run_id), str(g.generation),
                                           format_value(g.best), format_value(g.mean),
                                           format_value(g.pop_best), str(g.evaluations),
                                           str(g.arcs), g.learner]) + "\n")
                if progress is not None:
                    print(f"[{k}/{len(specs)}] {spec.problem.name} {spec.algorithm} "
                          f"rep {spec.rep}: best {rec.final_best:g} "
                          f"({rec.stop_reason}, {rec.evaluations} evals)",
                          file=progress, flush=True)
        finally:
            if tr:
                tr.close()
    return records


def read_results(path) -> list[dict]:
    """Parse a results file into one dict per run (header comment skipped)."""
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines()
             if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError(f"{path}: no header row")
    header = lines[0].split(SEP)
    missing = {"problem", "algorithm", "final_best"} - set(header)
    if missing:
        raise ValueError(f"{path}: missing columns {sorted(missing)}")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(SEP)
        if len(parts) != len(header):
            raise ValueError(f"{path}: malformed row {ln!r}")
        rows.append(dict(zip(header, parts)))
    return rows


def read_trace(path) -> list[dict]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = lines[0].split(SEP)
    return [dict(zip(header, ln.split(SEP))) for ln in lines[1:] if ln]
