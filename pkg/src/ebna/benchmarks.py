"""OneMax, Checkerboard, SixPeaks and EqualProducts.

Each benchmark has a scalar form taking one binary vector and a batch form
taking an (N, n) matrix; the batch forms are what the optimisers call.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .genome import MAXIMIZE, MINIMIZE, Objective, check_bounds

PROBLEMS = ("onemax", "checkerboard", "sixpeaks", "equalproducts")


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class SixPeaksSpec:
    n: int
    t: int

    def __post_init__(self):
        if not 0 < self.t < self.n / 2:
            raise ValueError(f"SixPeaks needs 0 < t < n/2, got t={self.t}, n={self.n}")

    @classmethod
    def from_fraction(cls, n: int, fraction: float = 0.30) -> "SixPeaksSpec":
        # round first so 0.3 * 50 = 15.000000000000002 and 0.3 * 10 = 2.9999999999999996 floor correctly
        return cls(n, int(math.floor(round(fraction * n, 9))))


@dataclass(frozen=True)
class EqualProductsSpec:
    weights: tuple
    seed: int

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0) or np.any(w > 4):
            raise ValueError("EqualProducts weights must lie in [0, 4]")

    @property
    def n(self) -> int:
        return len(self.weights)


def make_equal_products(n: int, seed: int) -> EqualProductsSpec:
    if n <= 0:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    return EqualProductsSpec(tuple(float(b) for b in rng.uniform(0.0, 4.0, size=n)), seed)


def _binary(x) -> np.ndarray:
    x = np.asarray(x)
    check_bounds(x, np.full(x.shape[-1], 2))
    return x.astype(np.int64)


def onemax(x) -> float:
    return float(_binary(x).sum())


def onemax_batch(X: np.ndarray) -> np.ndarray:
    return np.asarray(X, dtype=np.int64).sum(axis=1).astype(float)


def grid_side(n: int) -> int:
    s = math.isqrt(n)
    if s * s != n:
        raise DimensionError(f"checkerboard needs a square dimension, got n={n}")
    return s


def checkerboard_batch(X: np.ndarray, s: int | None = None) -> np.ndarray:
    X = np.asarray(X, dtype=np.int8)
    if s is None:
        s = grid_side(X.shape[1])
    elif s * s != X.shape[1]:
        raise DimensionError(f"n={X.shape[1]} is not {s}x{s}")
    C = X.reshape(-1, s, s)
    mid = C[:, 1:-1, 1:-1]
    agree = (
        (mid == C[:, :-2, 1:-1]).astype(np.int64)
        + (mid == C[:, 2:, 1:-1])
        + (mid == C[:, 1:-1, :-2])
        + (mid == C[:, 1:-1, 2:])
    )
    return (4 * (s - 2) ** 2 - agree.sum(axis=(1, 2))).astype(float)


def checkerboard(x, s: int | None = None) -> float:
    """Checkerboard score of a row-major s*s binary grid.

    Only the (s-2)x(s-2) interior is scored; each interior cell loses one
    point per horizontal or vertical neighbour holding the same bit.
    """
    x = _binary(x)
    return float(checkerboard_batch(x[None, :], s)[0])


def head(b: int, x) -> int:
    x = np.asarray(x)
    miss = np.flatnonzero(x != b)
    return int(miss[0]) if len(miss) else len(x)


def tail(b: int, x) -> int:
    return head(b, np.asarray(x)[::-1])


def _heads_batch(X: np.ndarray, b: int) -> np.ndarray:
    miss = X != b
    any_miss = miss.any(axis=1)
    return np.where(any_miss, miss.argmax(axis=1), X.shape[1])


def sixpeaks_batch(X: np.ndarray, spec: SixPeaksSpec) -> np.ndarray:
    X = np.asarray(X)
    rev = X[:, ::-1]
    h0, h1 = _heads_batch(X, 0), _heads_batch(X, 1)
    t0, t1 = _heads_batch(rev, 0), _heads_batch(rev, 1)
    t = spec.t
    bonus = ((t0 > t) & (h1 > t)) | ((t1 > t) & (h0 > t))
    best = np.maximum.reduce([t0, h1, t1, h0])
    return (best + np.where(bonus, X.shape[1], 0)).astype(float)


def sixpeaks(x, spec: SixPeaksSpec) -> float:
    x = _binary(x)
    t = spec.t
    t0, h1, t1, h0 = tail(0, x), head(1, x), tail(1, x), head(0, x)
    reward = len(x) if (t0 > t and h1 > t) or (t1 > t and h0 > t) else 0
    return float(max(t0, h1, t1, h0) + reward)


def equal_products_batch(X: np.ndarray, spec: EqualProductsSpec) -> np.ndarray:
    X = np.asarray(X).astype(bool)
    b = np.asarray(spec.weights, dtype=float)
    chosen = np.prod(np.where(X, b, 1.0), axis=1)
    rest = np.prod(np.where(X, 1.0, b), axis=1)
    return np.abs(chosen - rest)


def equal_products(x, spec: EqualProductsSpec) -> float:
    """|product of chosen weights - product of the others|, empty product = 1."""
    x = _binary(x)
    chosen = 1.0
    rest = 1.0
    for xi, bi in zip(x, spec.weights):
        if xi:
            chosen *= bi
        else:
            rest *= bi
    return abs(chosen - rest)


def make_objective(name: str, n: int | None = None, *, s: int | None = None,
                   t_fraction: float = 0.30, weights_seed: int = 0) -> Objective:
    """Build an :class:`Objective` for one of the four benchmarks by name."""
    name = name.lower()
    if name == "onemax":
        n = 128 if n is None else n
        return Objective("onemax", n, np.full(n, 2), MAXIMIZE, float(n),
                         func=onemax, batch=onemax_batch, params={"n": n})
    if name == "checkerboard":
        if s is None:
            s = 10 if n is None else grid_side(n)
        n = s * s
        if s < 3:
            raise DimensionError("checkerboard needs s >= 3")
        return Objective("checkerboard", n, np.full(n, 2), MAXIMIZE, float(4 * (s - 2) ** 2),
                         func=lambda x: checkerboard(x, s),
                         batch=lambda X: checkerboard_batch(X, s), params={"s": s})
    if name == "sixpeaks":
        n = 50 if n is None else n
        spec = SixPeaksSpec.from_fraction(n, t_fraction)
        return Objective("sixpeaks", n, np.full(n, 2), MAXIMIZE, float(2 * n - spec.t - 1),
                         func=lambda x: sixpeaks(x, spec),
                         batch=lambda X: sixpeaks_batch(X, spec),
                         params={"n": n, "t": spec.t})
    if name == "equalproducts":
        n = 50 if n is None else n
        spec = make_equal_products(n, weights_seed)
        return Objective("equalproducts", n, np.full(n, 2), MINIMIZE, None,
                         func=lambda x: equal_products(x, spec),
                         batch=lambda X: equal_products_batch(X, spec),
                         params={"n": n, "weights_seed": weights_seed,
                                 "weights": spec.weights})
    raise ValueError(f"unknown problem {name!r}; expected one of {', '.join(PROBLEMS)}")
