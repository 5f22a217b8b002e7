"""Decompositions checked against hand-derived values and algebraic identities."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpdmd.errors import NonFiniteError, RankOutOfRangeError
from cpdmd.linalg import cond2, eig_general, pinv, spectral_norm, truncated_svd


def test_svd_diagonal_rank_one():
    f = truncated_svd(np.array([[1.0, 0.0], [0.0, 0.0]]), 1)
    np.testing.assert_allclose(f.S, [1.0])
    np.testing.assert_allclose(np.abs(f.U), [[1.0], [0.0]])
    np.testing.assert_allclose(np.abs(f.V), [[1.0], [0.0]])


def test_svd_identity():
    np.testing.assert_allclose(truncated_svd(np.eye(2), 2).S, [1.0, 1.0])


def test_svd_hand_value():
    # A^T A = [[25, 0], [0, 0]]
    np.testing.assert_allclose(truncated_svd(np.array([[3.0, 0.0], [4.0, 0.0]]), 1).S, [5.0])


def test_svd_truncates_to_effective_rank():
    A = np.outer([1.0, 2.0, 3.0], [1.0, -1.0])
    f = truncated_svd(A, 2)
    assert f.rank == 1
    np.testing.assert_allclose(f.U * f.S @ f.V.T, A, atol=1e-12)


@pytest.mark.parametrize("r", [0, 3])
def test_svd_rank_out_of_range(r):
    with pytest.raises(RankOutOfRangeError):
        truncated_svd(np.ones((2, 2)), r)


def test_svd_rejects_nan():
    with pytest.raises(NonFiniteError):
        truncated_svd(np.array([[1.0, np.nan]]), 1)


def test_svd_factor_invariants():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((7, 5))
    f = truncated_svd(A, 5)
    assert np.all(np.diff(f.S) <= 0) and np.all(f.S >= 0)
    np.testing.assert_allclose(f.U.T @ f.U, np.eye(5), atol=1e-10)
    np.testing.assert_allclose(f.V.T @ f.V, np.eye(5), atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_svd_error_nonincreasing_in_rank(seed):
    A = np.random.default_rng(seed).standard_normal((6, 4))
    errors = []
    for r in range(1, 5):
        f = truncated_svd(A, r)
        errors.append(np.linalg.norm(A - f.U * f.S @ f.V.T))
    assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))


def test_eig_scalar():
    pairs = eig_general(np.array([[2.0]]))
    np.testing.assert_allclose(pairs.values, [2.0])
    np.testing.assert_allclose(pairs.vectors, [[1.0]])


def test_eig_rotation_is_plus_minus_i():
    pairs = eig_general(np.array([[0.0, -1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(sorted(pairs.values, key=lambda z: z.imag), [-1j, 1j], atol=1e-12)


def test_eig_identity():
    np.testing.assert_allclose(eig_general(np.eye(3)).values, [1, 1, 1])


def test_eig_normalisation_and_residual():
    A = np.random.default_rng(0).standard_normal((6, 6))
    pairs = eig_general(A)
    norm_a = spectral_norm(A)
    for k in range(6):
        v = pairs.vectors[:, k]
        assert abs(np.linalg.norm(v) - 1) < 1e-12
        top = v[np.argmax(np.abs(v))]
        assert abs(top.imag) < 1e-12 and top.real > 0
        assert np.linalg.norm(A @ v - pairs.values[k] * v) <= 1e-8 * norm_a


def test_pinv_examples():
    np.testing.assert_allclose(pinv(np.array([[2.0]])), [[0.5]])
    np.testing.assert_allclose(pinv(np.diag([1.0, 0.0])), np.diag([1.0, 0.0]))


def test_pinv_normal_equations_oracle():
    A = np.random.default_rng(1).standard_normal((4, 2))
    np.testing.assert_allclose(pinv(A), np.linalg.solve(A.T @ A, A.T), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_pinv_penrose_conditions(seed):
    A = np.random.default_rng(seed).standard_normal((5, 3))
    P = pinv(A)
    scale = np.linalg.norm(A)
    assert np.linalg.norm(A @ P @ A - A) <= 1e-8 * scale
    assert np.linalg.norm(P @ A @ P - P) <= 1e-8 * np.linalg.norm(P)
    np.testing.assert_allclose(A @ P, (A @ P).T, atol=1e-8)
    np.testing.assert_allclose(P @ A, (P @ A).T, atol=1e-8)


def test_norms():
    assert spectral_norm(np.zeros((2, 2))) == 0.0
    assert spectral_norm(np.diag([3.0, -4.0])) == pytest.approx(4.0)
    assert cond2(np.diag([1.0, 4.0])) == pytest.approx(4.0)
    assert cond2(np.diag([1.0, 0.0])) == np.inf
