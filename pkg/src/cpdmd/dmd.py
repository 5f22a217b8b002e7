"""Rank-truncated exact dynamic mode decomposition.

Snapshots are the columns of an ``(n, m)`` real matrix and are assumed to
be unit-spaced in time, so continuous-time dynamics are simply the
principal logarithm of the discrete eigenvalues.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWindowError, RankOutOfRangeError, ShapeMismatchError
from .linalg import eig_general, pinv, truncated_svd

#: Modes whose discrete eigenvalue is smaller than this in modulus are dropped.
EIGENVALUE_FLOOR = 1e-12


@dataclass(frozen=True)
class DmdDecomposition:
    """Result of :func:`dmd`.

    Attributes
    ----------
    rank_used : int
        Number of retained modes (at most the requested rank).
    modes : ndarray, shape (n, rank_used)
    eigs : ndarray, shape (rank_used,)
        Discrete-time eigenvalues.
    dynamics : ndarray, shape (rank_used,)
        ``log(eigs)`` on the principal branch.
    amplitudes : ndarray, shape (rank_used,)
    reconstruction : ndarray, shape (n, m)
        Real part of the modal reconstruction of the snapshots.
    imag_residue : float
        Frobenius norm of the discarded imaginary part.
    """

    rank_used: int
    modes: np.ndarray
    eigs: np.ndarray
    dynamics: np.ndarray
    amplitudes: np.ndarray
    reconstruction: np.ndarray
    imag_residue: float


def _lagged(snapshots) -> tuple:
    x = np.asarray(snapshots, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] < 2:
        raise ShapeMismatchError(f"need at least two snapshots, got shape {x.shape}")
    return x, x[:, :-1], x[:, 1:]


def dmd(snapshots, r: int) -> DmdDecomposition:
    """Exact DMD of ``snapshots`` truncated to rank ``r``.

    The first ``m - 1`` columns are regressed onto the last ``m - 1``
    through a rank-``r`` SVD; modes are ``Y V S^-1 W`` and amplitudes are
    fitted to the first snapshot only. Column ``k`` of the reconstruction
    is ``Re(Phi @ (eigs**k * b))``.
    """
    x, X, Y = _lagged(snapshots)
    n, m = x.shape
    if not 1 <= r <= min(n, m - 1):
        raise RankOutOfRangeError(f"rank {r} outside [1, {min(n, m - 1)}]")
    svd = truncated_svd(X, r)
    if svd.rank == 0:
        raise DegenerateWindowError("snapshot matrix has numerical rank 0")

    YVS = (Y @ svd.V) / svd.S
    A_tilde = svd.U.conj().T @ YVS
    pairs = eig_general(A_tilde)
    keep = np.abs(pairs.values) >= EIGENVALUE_FLOOR
    eigs = pairs.values[keep]
    modes = YVS @ pairs.vectors[:, keep]

    if eigs.size == 0:
        empty = np.zeros(0, dtype=complex)
        return DmdDecomposition(0, modes, empty, empty, empty, np.zeros_like(x), 0.0)

    amplitudes = pinv(modes) @ x[:, 0]
    dynamics = np.log(eigs)
    time_evolution = np.exp(np.outer(dynamics, np.arange(m))) * amplitudes[:, None]
    full = modes @ time_evolution
    return DmdDecomposition(
        rank_used=int(eigs.size),
        modes=modes,
        eigs=eigs,
        dynamics=dynamics,
        amplitudes=amplitudes,
        reconstruction=full.real,
        imag_residue=float(np.linalg.norm(full.imag)),
    )


def dmd_operator_full(snapshots) -> np.ndarray:
    """Best-fit linear operator ``Y X^+`` mapping each snapshot to the next."""
    _, X, Y = _lagged(snapshots)
    if not np.any(X):
        raise DegenerateWindowError("lagged snapshot matrix is identically zero")
    return Y @ pinv(X)
