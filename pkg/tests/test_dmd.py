import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpdmd.dmd import dmd, dmd_operator_full
from cpdmd.errors import DegenerateWindowError, RankOutOfRangeError
from cpdmd.linalg import truncated_svd


def test_scalar_doubling():
    dec = dmd(np.array([[1.0, 2, 4, 8]]), 1)
    np.testing.assert_allclose(dec.eigs, [2.0])
    np.testing.assert_allclose(dec.reconstruction, [[1, 2, 4, 8]], atol=1e-9)


def test_rotation_eigenvalues_on_unit_circle():
    theta = np.pi / 8
    k = np.arange(16)
    snaps = np.vstack([np.cos(k * theta), np.sin(k * theta)])
    dec = dmd(snaps, 2)
    np.testing.assert_allclose(np.abs(dec.eigs), 1.0, atol=1e-9)
    np.testing.assert_allclose(np.sort(np.angle(dec.eigs)), [-theta, theta], atol=1e-9)
    assert np.linalg.norm(dec.reconstruction - snaps) <= 1e-8


def test_constant_is_fixed_point():
    dec = dmd(np.array([[5.0, 5, 5, 5]]), 1)
    np.testing.assert_allclose(dec.eigs, [1.0])
    np.testing.assert_allclose(dec.reconstruction, [[5, 5, 5, 5]])


def test_operator_examples():
    np.testing.assert_allclose(dmd_operator_full(np.array([[1.0, 2, 4, 8]])), [[2.0]])
    np.testing.assert_allclose(dmd_operator_full(np.array([[5.0, 5, 5]])), [[1.0]])


def test_operator_recovers_known_matrix():
    A = np.array([[0.9, 0.1], [0.0, 0.8]])
    x = np.empty((2, 6))
    x[:, 0] = [1.0, -0.7]
    for k in range(1, 6):
        x[:, k] = A @ x[:, k - 1]
    assert np.linalg.norm(dmd_operator_full(x) - A) <= 1e-8


def test_rank_out_of_range():
    with pytest.raises(RankOutOfRangeError):
        dmd(np.ones((2, 3)), 3)


def test_zero_window_is_degenerate():
    with pytest.raises(DegenerateWindowError):
        dmd(np.zeros((2, 5)), 1)
    with pytest.raises(DegenerateWindowError):
        dmd_operator_full(np.zeros((2, 5)))


def test_nilpotent_modes_are_dropped():
    # x_{k+1} = 0 after the first step, so the only eigenvalue is 0
    dec = dmd(np.array([[1.0, 0.0, 0.0]]), 1)
    assert dec.rank_used == 0
    np.testing.assert_array_equal(dec.reconstruction, 0.0)


def test_first_column_is_projection_onto_modes():
    x = np.random.default_rng(2).standard_normal((5, 12))
    dec = dmd(x, 3)
    Q, _ = np.linalg.qr(dec.modes)
    np.testing.assert_allclose(dec.reconstruction[:, 0], (Q @ Q.conj().T @ x[:, 0]).real, atol=1e-9)


def test_real_data_has_small_imaginary_residue():
    t = np.arange(30)
    x = np.vstack([np.sin(0.3 * t), np.cos(0.3 * t) + 0.5 * np.sin(0.7 * t), np.cos(0.7 * t)])
    dec = dmd(x, 3)
    assert dec.imag_residue <= 1e-8 * np.linalg.norm(x)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_one_step_residual_nonincreasing_in_rank(seed):
    x = np.random.default_rng(seed).standard_normal((4, 10))
    X, Y = x[:, :-1], x[:, 1:]
    residuals = []
    for r in range(1, 5):
        f = truncated_svd(X, r)
        Ur = f.U
        # rank-r operator U_r A_tilde U_r^H applied to the snapshots
        A_tilde = Ur.T @ Y @ f.V / f.S
        residuals.append(np.linalg.norm(Y - Ur @ A_tilde @ Ur.T @ X))
    assert all(b <= a + 1e-10 for a, b in zip(residuals, residuals[1:]))
