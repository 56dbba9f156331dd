"""Command line entry point: ``ebna run | report | sample | bound``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from ..bayesnet import dump_network, pls_sample
from ..eda import STRATEGIES, ModelBuilder
from ..genome import Dataset
from ..scores import PenaltySpec, parent_bound, parent_bound_rhs
from .config import CONFIG_KEYS, ConfigError, build_config, parse_config_file

OUTPUT_ENV = "EBNA_OUTPUT_DIR"

# cardinalities of the 20-variable worked example for the parent bound
EXAMPLE_CARDINALITIES = [3] * 7 + [4] + [3] * 5 + [4] + [3] * 5 + [4]


def _config_epilog() -> str:
    lines = ["config file keys (key = value, '#' comments; flags override the file):"]
    lines += [f"  {k:<26} {v}" for k, v in CONFIG_KEYS.items()]
    lines.append(f"\nresults go to ${OUTPUT_ENV} (default: current directory) unless --out is given")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ebna", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run experiments and write a results file",
                         epilog=_config_epilog(),
                         formatter_class=argparse.RawDescriptionHelpFormatter)
    run.add_argument("--config", type=Path, help="flat key=value config file")
    run.add_argument("--problem", help="onemax | checkerboard | sixpeaks | equalproducts (comma list)")
    run.add_argument("--table1-defaults", action="store_true",
                     help="all four problems with their default sizes and budgets")
    run.add_argument("--algo", help="algorithm list or 'all'")
    run.add_argument("--n", type=int, dest="problem_n")
    run.add_argument("--s", type=int, dest="problem_s")
    run.add_argument("--pop-size", type=int)
    run.add_argument("--budget", type=int)
    run.add_argument("--weights-seed", type=int)
    run.add_argument("--reps", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--stagnation", help="mean-change threshold or 'none'")
    run.add_argument("--elitism", action="store_true", default=None)
    run.add_argument("--k2-penalty", help="aic | bic | <number>")
    run.add_argument("--workers", type=int)
    run.add_argument("--trace", action="store_true", default=None)
    run.add_argument("--out", type=Path, help="results file path")

    rep = sub.add_parser("report", help="aggregate a results file into tables and figures")
    rep.add_argument("results", type=Path)
    rep.add_argument("--out-dir", type=Path)
    rep.add_argument("--alpha", type=float, default=0.05)
    rep.add_argument("--no-figures", action="store_true")

    smp = sub.add_parser("sample", help="learn a model from a dataset, dump it and sample from it")
    smp.add_argument("--data", type=Path, required=True,
                     help="one row per line, integer values separated by spaces or commas")
    smp.add_argument("--cardinalities", help="comma list (default: column max + 1, at least 2)")
    smp.add_argument("--algo", default="ebna_bic", choices=STRATEGIES)
    smp.add_argument("--samples", type=int, default=10)
    smp.add_argument("--seed", type=int, default=0)
    smp.add_argument("--k2-penalty", default="aic")
    smp.add_argument("--dump-model", action="store_true", help="print the learnt network")
    smp.add_argument("--out", type=Path, help="write samples here instead of stdout")

    bnd = sub.add_parser("bound", help="print K2+pen parent bounds")
    bnd.add_argument("--cardinalities", help="comma list; default is the 20-variable example")
    bnd.add_argument("--n-cases", type=int, required=True)
    bnd.add_argument("--f", default="aic", help="penalty weight: aic, bic or a number")
    bnd.add_argument("--variable", type=int, help="1-based variable index (default: all)")
    return parser


def _run_values(args) -> dict:
    values = parse_config_file(args.config) if args.config else {}
    flags = {
        "problem": "table1" if args.table1_defaults else args.problem,
        "algo": args.algo,
        "problem.n": args.problem_n,
        "problem.s": args.problem_s,
        "problem.pop_size": args.pop_size,
        "problem.budget": args.budget,
        "problem.weights_seed": args.weights_seed,
        "run.reps": args.reps,
        "run.seed": args.seed,
        "run.stagnation_epsilon": args.stagnation,
        "run.elitism": args.elitism,
        "algo.ebna_k2pen.f": args.k2_penalty,
        "run.workers": args.workers,
        "run.trace": args.trace,
    }
    values.update({k: str(v) for k, v in flags.items() if v is not None})
    return values


def cmd_run(args, parser) -> int:
    from .runner import plan_runs, run_experiment

    try:
        cfg = build_config(_run_values(args))
    except ConfigError as exc:
        parser.error(str(exc))
    out = args.out or Path(os.environ.get(OUTPUT_ENV, ".")) / "results.tsv"
    n = len(plan_runs(cfg))
    print(f"scheduling {n} runs: {len(cfg.problems)} problems x {len(cfg.algorithms)} "
          f"algorithms x {cfg.reps} reps -> {out}", file=sys.stderr)
    try:
        run_experiment(cfg, out)
    except OSError as exc:
        print(f"ebna: cannot write results: {exc}", file=sys.stderr)
        return 3
    return 0


def cmd_report(args) -> int:
    from .report import (AggregationError, mean_table, omnibus_table, rank_table,
                         render_aligned, summary_table, write_report)

    try:
        report, written = write_report(args.results, args.out_dir, not args.no_figures, args.alpha)
    except (AggregationError, ValueError, OSError) as exc:
        print(f"ebna: {exc}", file=sys.stderr)
        return 2
    print("mean final value\n" + render_aligned(mean_table(report)))
    print("rank groups (adjacent Kruskal-Wallis tests)\n" + render_aligned(rank_table(report)))
    print("omnibus Kruskal-Wallis\n" + render_aligned(omnibus_table(report)))
    print("per-cell summary\n" + render_aligned(summary_table(report)))
    for p in written:
        print(f"wrote {p}", file=sys.stderr)
    return 0


def load_dataset(path: Path, cardinalities=None) -> Dataset:
    rows = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].replace(",", " ").strip()
        if line:
            rows.append([int(v) for v in line.split()])
    if not rows:
        raise ValueError(f"{path}: no data rows")
    arr = np.array(rows, dtype=np.int64)
    if cardinalities is None:
        cardinalities = np.maximum(arr.max(axis=0) + 1, 2)
    return Dataset(arr, cardinalities)


def cmd_sample(args) -> int:
    card = [int(c) for c in args.cardinalities.split(",")] if args.cardinalities else None
    data = load_dataset(args.data, card)
    builder = ModelBuilder(args.algo, penalty=PenaltySpec.parse(args.k2_penalty))
    net, learner = builder.build(data)
    if args.dump_model:
        sys.stdout.write(f"# {args.algo} model ({learner}), {net.structure.n_arcs} arcs\n")
        sys.stdout.write(dump_network(net))
    rows = pls_sample(net, args.samples, np.random.default_rng(args.seed)).rows
    text = "\n".join(" ".join(str(v) for v in r) for r in rows) + "\n"
    if args.out:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_bound(args) -> int:
    card = ([int(c) for c in args.cardinalities.split(",")] if args.cardinalities
            else EXAMPLE_CARDINALITIES)
    pen = PenaltySpec.parse(args.f)
    f = pen(args.n_cases)
    targets = [args.variable - 1] if args.variable else range(len(card))
    for i in targets:
        if not 0 <= i < len(card):
            print(f"ebna: variable {i + 1} out of range 1..{len(card)}", file=sys.stderr)
            return 2
        m, l = divmod(args.n_cases, card[i])
        rhs = parent_bound_rhs(card[i], args.n_cases, f)
        pa = parent_bound(i, card, args.n_cases, pen)
        print(f"variable {i + 1}: r={card[i]} N={args.n_cases} f={f:g} m={m} l={l} "
              f"RHS = {rhs:.4f} pa = {pa}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "run":
        if not (args.problem or args.table1_defaults or args.config):
            parser.error("run needs --problem, --table1-defaults or --config")
        return cmd_run(args, parser)
    if args.command == "report":
        return cmd_report(args)
    if args.command == "sample":
        return cmd_sample(args)
    return cmd_bound(args)


if __name__ == "__main__":
    sys.exit(main())
