import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpdmd.embedding import hankelize, make_window, unroll
from cpdmd.errors import InsufficientHistoryError, OrderOutOfRangeError, ShapeMismatchError


def test_make_window_univariate():
    np.testing.assert_array_equal(make_window(np.array([1.0, 2, 3, 4]), 4, 3), [[2, 3, 4]])


def test_make_window_bivariate():
    history = np.array([[1.0, 5], [2, 6], [3, 7]])
    np.testing.assert_array_equal(make_window(history, 3, 2), [[2, 3], [6, 7]])


def test_make_window_needs_history():
    with pytest.raises(InsufficientHistoryError):
        make_window(np.arange(5.0), 2, 3)


def test_hankelize_examples():
    X = np.array([[1.0, 2, 3, 4]])
    np.testing.assert_array_equal(hankelize(X, 2), [[1, 2, 3], [2, 3, 4]])
    np.testing.assert_array_equal(hankelize(X, 1), X)
    Y = np.array([[1.0, 2, 3], [9, 8, 7]])
    np.testing.assert_array_equal(hankelize(Y, 2), [[1, 2], [2, 3], [9, 8], [8, 7]])


@pytest.mark.parametrize("d", [0, 5])
def test_hankelize_order_out_of_range(d):
    with pytest.raises(OrderOutOfRangeError):
        hankelize(np.array([[1.0, 2, 3, 4]]), d)


def test_unroll_examples():
    np.testing.assert_array_equal(unroll(hankelize(np.array([[1.0, 2, 3, 4]]), 2), 1, 2), [[1, 2, 3, 4]])
    # first row, then down the last column
    np.testing.assert_array_equal(unroll(np.array([[10.0, 20, 30], [40, 50, 60]]), 1, 2), [[10, 20, 30, 60]])
    row = np.array([[3.0, 1, 4]])
    np.testing.assert_array_equal(unroll(row, 1, 1), row)


def test_unroll_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        unroll(np.ones((3, 4)), 2, 2)


@st.composite
def windows(draw):
    p = draw(st.integers(1, 4))
    w = draw(st.integers(2, 50))
    d = draw(st.integers(1, w))
    seed = draw(st.integers(0, 2**32 - 1))
    return np.random.default_rng(seed).standard_normal((p, w)), d


@settings(max_examples=1000, deadline=None)
@given(windows())
def test_round_trip_and_shape(case):
    X, d = case
    p, w = X.shape
    H = hankelize(X, d)
    assert H.shape == (p * d, w - d + 1)
    np.testing.assert_array_equal(unroll(H, p, d), X)


@settings(max_examples=100, deadline=None)
@given(windows(), st.floats(-5, 5), st.floats(-5, 5))
def test_hankelize_is_linear(case, a, b):
    X, d = case
    Y = np.flip(X, axis=1)
    np.testing.assert_allclose(hankelize(a * X + b * Y, d), a * hankelize(X, d) + b * hankelize(Y, d), atol=1e-12)


def test_blocks_are_hankel():
    H = hankelize(np.random.default_rng(0).standard_normal((2, 9)), 3)
    for block in H.reshape(2, 3, 7):
        np.testing.assert_array_equal(block[1:, :-1], block[:-1, 1:])
