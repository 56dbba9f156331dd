import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ebna.benchmarks import (DimensionError, EqualProductsSpec, SixPeaksSpec, checkerboard,
                             checkerboard_batch, equal_products, equal_products_batch,
                             make_equal_products, make_objective, onemax, sixpeaks, sixpeaks_batch)

bits = lambda n: arrays(np.int64, n, elements=st.integers(0, 1))  # noqa: E731


def perfect_board(s):
    return np.indices((s, s)).sum(axis=0).ravel() % 2


def test_onemax_examples():
    assert onemax(np.ones(128, dtype=int)) == 128
    assert onemax(np.zeros(10, dtype=int)) == 0
    assert onemax([0, 1, 1, 0, 1]) == 3


def test_checkerboard_examples():
    assert checkerboard(perfect_board(10)) == 256
    assert checkerboard(np.zeros(100, dtype=int)) == 0
    x = np.zeros(9, dtype=int)
    x[4] = 1
    assert checkerboard(x, 3) == 4


def test_checkerboard_needs_square():
    with pytest.raises(DimensionError):
        checkerboard(np.zeros(10, dtype=int))


def test_sixpeaks_examples():
    spec = SixPeaksSpec.from_fraction(50)
    assert spec.t == 15
    x = np.array([1] * 16 + [0] * 34)
    assert sixpeaks(x, spec) == 84
    assert sixpeaks(np.ones(50, dtype=int), spec) == 50
    assert sixpeaks(np.zeros(50, dtype=int), spec) == 50


def test_sixpeaks_threshold_floor():
    assert SixPeaksSpec.from_fraction(10).t == 3
    assert SixPeaksSpec.from_fraction(51).t == 15
    with pytest.raises(ValueError):
        SixPeaksSpec(10, 5)


def test_equal_products_examples():
    assert equal_products([1, 0], EqualProductsSpec((2.0, 2.0), 0)) == 0
    assert equal_products([1, 1], EqualProductsSpec((2.0, 2.0), 0)) == 3
    spec = EqualProductsSpec((1.0,) * 4, 0)
    for x in ([0, 0, 0, 0], [1, 0, 1, 1], [1, 1, 1, 1]):
        assert equal_products(x, spec) == 0


def test_make_equal_products():
    a, b = make_equal_products(50, 3), make_equal_products(50, 3)
    assert a.weights == b.weights
    assert all(0 <= w <= 4 for w in a.weights)
    vectors = {make_equal_products(50, s).weights for s in range(100)}
    assert len(vectors) == 100


def test_standard_optima():
    assert make_objective("onemax").known_optimum == 128
    assert make_objective("checkerboard").known_optimum == 256
    assert make_objective("sixpeaks").known_optimum == 84
    assert make_objective("equalproducts").known_optimum is None
    assert make_objective("equalproducts").direction == "minimize"
    assert make_objective("checkerboard")(perfect_board(10)) == 256


def test_unknown_problem():
    with pytest.raises(ValueError):
        make_objective("trap5")


@settings(max_examples=100, deadline=None)
@given(bits(20))
def test_onemax_complement(x):
    assert onemax(x) + onemax(1 - x) == 20


@settings(max_examples=100, deadline=None)
@given(bits(36))
def test_checkerboard_symmetries(x):
    v = checkerboard(x)
    assert checkerboard(1 - x) == v
    assert checkerboard(np.rot90(x.reshape(6, 6)).ravel()) == v


@settings(max_examples=200, deadline=None)
@given(bits(20))
def test_sixpeaks_reverse_complement(x):
    spec = SixPeaksSpec.from_fraction(20)
    assert sixpeaks(x, spec) == sixpeaks((1 - x)[::-1], spec)


@settings(max_examples=100, deadline=None)
@given(bits(12), st.integers(0, 1000))
def test_equal_products_complement(x, seed):
    spec = make_equal_products(12, seed)
    assert equal_products(x, spec) == pytest.approx(equal_products(1 - x, spec))


@settings(max_examples=50, deadline=None)
@given(arrays(np.int64, (7, 25), elements=st.integers(0, 1)))
def test_batch_forms_match_scalar(X):
    spec6 = SixPeaksSpec.from_fraction(25)
    specp = make_equal_products(25, 1)
    assert np.array_equal(checkerboard_batch(X), [checkerboard(x) for x in X])
    assert np.array_equal(sixpeaks_batch(X, spec6), [sixpeaks(x, spec6) for x in X])
    assert np.allclose(equal_products_batch(X, specp), [equal_products(x, specp) for x in X])
