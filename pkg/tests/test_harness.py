import subprocess
import sys

import numpy as np
import pytest

from ebna.harness.cli import main
from ebna.harness.config import (ALGORITHMS, STANDARD_PROBLEMS, ConfigError, build_config, derive_seed,
                                 parse_algorithms, parse_config_file)
from ebna.harness.report import AggregationError, aggregate, mean_table, rank_table, write_report
from ebna.harness.runner import (RESULT_COLUMNS, plan_runs, read_results, read_trace,
                                 run_experiment)

SMALL = ["--n", "12", "--pop-size", "40", "--budget", "400", "--workers", "1"]


def run_cli(tmp_path, name, *extra):
    out = tmp_path / name
    assert main(["run", "--out", str(out), *extra]) == 0
    return out


def body(path):
    return path.read_text().splitlines()[1:]


def test_run_is_deterministic(tmp_path):
    args = ["--problem", "onemax", "--algo", "umda", "--reps", "3", "--seed", "7", *SMALL]
    a = run_cli(tmp_path, "a.tsv", *args)
    b = run_cli(tmp_path, "b.tsv", *args)
    assert a.read_text().startswith("# ebna results created ")
    assert body(a) == body(b)
    rows = read_results(a)
    assert len(rows) == 3
    assert tuple(body(a)[0].split("\t")) == RESULT_COLUMNS
    assert len({r["seed"] for r in rows}) == 3
    assert all(r["stop_reason"] in ("optimum", "budget", "stagnation") for r in rows)


def test_parallel_workers_match_serial(tmp_path):
    args = ["--problem", "sixpeaks", "--algo", "umda,ga", "--reps", "2", "--seed", "1",
            "--n", "12", "--pop-size", "40", "--budget", "400"]
    a = run_cli(tmp_path, "a.tsv", *args, "--workers", "1")
    b = run_cli(tmp_path, "b.tsv", *args, "--workers", "2")
    assert body(a) == body(b)


def test_seed_derivation():
    assert derive_seed(0, "onemax", "umda", 0) == derive_seed(0, "onemax", "umda", 0)
    seeds = {derive_seed(m, p, a, r) for m in (0, 1) for p in ("onemax", "sixpeaks")
             for a in ("umda", "ga") for r in range(5)}
    assert len(seeds) == 40
    assert all(0 <= s < 2 ** 63 for s in seeds)


def test_missing_problem_is_usage_error():
    proc = subprocess.run([sys.executable, "-m", "ebna", "run", "--algo", "umda"],
                          capture_output=True, text=True)
    assert proc.returncode != 0
    assert "usage" in proc.stderr


def test_unknown_names_rejected(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--problem", "onemax", "--algo", "boa", "--out", str(tmp_path / "x")])
    assert exc.value.code != 0
    with pytest.raises(SystemExit):
        main(["run", "--problem", "trap", "--out", str(tmp_path / "x")])
    with pytest.raises(ConfigError):
        parse_algorithms("umda,nope")


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code = main(["run", "--problem", "onemax", "--algo", "umda", "--reps", "1",
                 "--out", str(blocker / "sub" / "r.tsv"), *SMALL])
    assert code != 0


def test_standard_defaults_schedule():
    cfg = build_config({"problem": "table1", "algo": "all", "run.reps": "3", "run.workers": "1"})
    assert len(plan_runs(cfg)) == 6 * 4 * 3
    assert len(ALGORITHMS) == 6
    dims = {p.name: (p.n, p.s, p.pop_size, p.budget) for p in cfg.problems}
    assert dims == {"onemax": (128, None, 512, 100_000), "checkerboard": (None, 10, 1000, 100_000),
                    "sixpeaks": (50, None, 1600, 300_000),
                    "equalproducts": (50, None, 1600, 300_000)}
    assert cfg.reps == 3 and build_config({"problem": "onemax"}).reps == 10
    assert STANDARD_PROBLEMS["sixpeaks"].objective().known_optimum == 84


def test_config_file_and_flag_precedence(tmp_path):
    conf = tmp_path / "exp.conf"
    conf.write_text("# demo\nproblem = onemax\nproblem.n = 10\nalgo = umda, ga\n"
                    "problem.pop_size = 30\nproblem.budget = 300\nrun.reps = 2\n"
                    "run.workers = 1\nalgo.ebna_k2pen.f = bic\n")
    values = parse_config_file(conf)
    assert values["problem.n"] == "10"
    cfg = build_config(values)
    assert cfg.algorithms == ["umda", "ga"] and cfg.params.k2_penalty == "bic"
    out = run_cli(tmp_path, "r.tsv", "--config", str(conf), "--reps", "1")
    assert len(read_results(out)) == 2
    bad = tmp_path / "bad.conf"
    bad.write_text("problem.size = 3\n")
    with pytest.raises(ConfigError):
        parse_config_file(bad)


def test_trace_file_and_report_outputs(tmp_path):
    out = run_cli(tmp_path, "r.tsv", "--problem", "onemax", "--algo", "umda,ebna_bic",
                  "--reps", "2", "--trace", *SMALL)
    trace = read_trace(out.with_name("r.tsv.trace.tsv"))
    assert {t["learner"] for t in trace} >= {"uniform", "marginals"}
    for rid in {t["run_id"] for t in trace}:
        evals = [int(t["evaluations"]) for t in trace if t["run_id"] == rid]
        assert all(b > a for a, b in zip(evals, evals[1:]))
    assert out.with_name("r.tsv.timing.tsv").exists()
    assert main(["report", str(out), "--out-dir", str(tmp_path / "rep")]) == 0
    names = {p.name for p in (tmp_path / "rep").iterdir()}
    assert {"r.means.tsv", "r.ranks.tsv", "r.summary.tsv", "r.kruskal.tsv"} <= names
    assert "r.onemax.final.png" in names and "r.onemax.convergence.png" in names


def synthetic(problem, algo, values, direction="max", cid="c0"):
    return [{"problem": problem, "algorithm": algo, "final_best": repr(float(v)),
             "direction": direction, "config_id": cid} for v in values]


def test_report_single_cell():
    rep = aggregate(synthetic("onemax", "umda", [128, 128, 127]))
    assert mean_table(rep) == [["algorithm", "onemax"], ["umda", f"{383 / 3:.6g}"]]
    assert rank_table(rep) == [["algorithm", "onemax"], ["umda", "1"]]


def test_report_passes_means_through():
    rows = (synthetic("sixpeaks", "umda", [60, 62, 64]) + synthetic("sixpeaks", "ga", [80, 84, 85])
            + synthetic("onemax", "umda", [128] * 3))
    table = mean_table(aggregate(rows))
    # problems and algorithms appear in their canonical order
    assert table[0] == ["algorithm", "onemax", "sixpeaks"]
    assert table[1] == ["umda", "128", "62"]
    assert table[2] == ["ga", "", "83"]


def test_minimization_ranks_smaller_first():
    rng = np.random.default_rng(0)
    rows = (synthetic("equalproducts", "umda", 5 + rng.random(10), "min")
            + synthetic("equalproducts", "ebna_bic", rng.random(10), "min"))
    rep = aggregate(rows)
    assert rep.ranks["equalproducts"].labels == ["ebna_bic", "umda"]
    assert rep.ranks["equalproducts"].as_dict() == {"ebna_bic": 1, "umda": 2}


def test_mixed_configs_rejected(tmp_path):
    rows = synthetic("onemax", "umda", [1, 2], cid="a") + synthetic("onemax", "umda", [3], cid="b")
    with pytest.raises(AggregationError):
        aggregate(rows)
    path = tmp_path / "mixed.tsv"
    header = "\t".join(rows[0].keys())
    path.write_text(header + "\n" + "\n".join("\t".join(r.values()) for r in rows) + "\n")
    with pytest.raises(AggregationError):
        write_report(path, figures=False)
    assert main(["report", str(path), "--no-figures"]) != 0


def test_budget_slack_respected(tmp_path):
    cfg = build_config({"problem": "checkerboard", "problem.s": "5", "problem.pop_size": "30",
                        "problem.budget": "200", "algo": "umda,ga", "run.reps": "2",
                        "run.workers": "1", "run.stagnation_epsilon": "none"})
    for rec in run_experiment(cfg, tmp_path / "r.tsv", progress=None):
        assert rec.evaluations <= 200 + 30


def test_sample_command(tmp_path, capsys):
    rng = np.random.default_rng(0)
    x = rng.integers(0, 2, 300)
    data = np.column_stack([x, x ^ (rng.random(300) < 0.05), rng.integers(0, 3, 300)])
    path = tmp_path / "d.txt"
    path.write_text("\n".join(" ".join(map(str, r)) for r in data) + "\n")
    assert main(["sample", "--data", str(path), "--dump-model", "--samples", "5"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("# ebna_bic model (algorithm_b), 1 arcs")
    assert out[1].startswith("X0 | - |") and out[2].startswith("X1 | 0 |")
    samples = [list(map(int, ln.split())) for ln in out[4:]]
    assert len(samples) == 5 and all(len(s) == 3 and s[2] < 3 for s in samples)


def test_bound_command(capsys):
    assert main(["bound", "--n-cases", "422", "--variable", "8"]) == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("variable 8: r=4 N=422 f=1 m=105 l=2 RHS = ")
    assert line.endswith("pa = 5")
    assert main(["bound", "--n-cases", "422", "--variable", "21"]) != 0
