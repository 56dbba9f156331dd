import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from ebna.bayesnet import BayesianNetwork, DagStructure, pls_sample  # noqa: E402
from ebna.genome import Dataset  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_network(n, rng, max_parents=2, cardinalities=None, concentration=0.5):
    """Random DAG over a random order with Dirichlet CPTs."""
    card = np.full(n, 2) if cardinalities is None else np.asarray(cardinalities)
    order = rng.permutation(n)
    parents = [[] for _ in range(n)]
    for k, v in enumerate(order):
        earlier = list(order[:k])
        m = min(len(earlier), int(rng.integers(0, max_parents + 1)))
        parents[v] = list(rng.choice(earlier, size=m, replace=False)) if m else []
    structure = DagStructure(n, parents)
    theta = []
    for i in range(n):
        q = int(np.prod([card[p] for p in structure.parents[i]])) if structure.parents[i] else 1
        t = rng.dirichlet(np.full(card[i], concentration), size=q)
        t = np.clip(t, 1e-3, None)
        theta.append(t / t.sum(axis=1, keepdims=True))
    return BayesianNetwork(structure, theta, card)


def sample_dataset(net, N, rng) -> Dataset:
    return pls_sample(net, N, rng)


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = []


def report_criterion(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
