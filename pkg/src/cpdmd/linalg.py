"""Dense linear-algebra kernels used by the DMD code.

LAPACK (through :mod:`numpy.linalg`) does the heavy lifting; this module
fixes the conventions the rest of the package relies on: a relative
singular-value cutoff, silent rank truncation, deterministic eigenvector
phases and typed errors instead of ``LinAlgError``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceFailure,
    NonFiniteError,
    RankOutOfRangeError,
    ShapeMismatchError,
)

#: Singular values below ``SINGULAR_CUTOFF * sigma_max`` are treated as zero.
SINGULAR_CUTOFF = 1e-12


@dataclass(frozen=True)
class SvdFactors:
    """Leading singular triplets ``A ~ U @ diag(S) @ V.conj().T``.

    ``rank`` may be smaller than the requested rank when trailing singular
    values fall under the cutoff.
    """

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.S.shape[0])


@dataclass(frozen=True)
class EigenPairs:
    values: np.ndarray
    vectors: np.ndarray


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ShapeMismatchError(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    if not np.isfinite(A).all():
        raise NonFiniteError("matrix contains non-finite entries")
    return A


def _svd(A: np.ndarray):
    try:
        return np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"SVD did not converge: {exc}") from exc


def effective_rank(S: np.ndarray, r: int) -> int:
    """Number of leading singular values kept under the relative cutoff, capped at ``r``."""
    if S.size == 0 or S[0] <= 0.0:
        return 0
    return min(r, int(np.count_nonzero(S >= SINGULAR_CUTOFF * S[0])))


def truncated_svd(A, r: int) -> SvdFactors:
    """Rank-``r`` truncated SVD of a real or complex matrix.

    Parameters
    ----------
    A : array_like, shape (n, m)
    r : int
        Requested rank, ``1 <= r <= min(n, m)``.

    Returns
    -------
    SvdFactors
        ``U`` is (n, k), ``S`` has length k (descending), ``V`` is (m, k)
        where ``k <= r`` is the effective rank.
    """
    A = _as_matrix(A)
    if not 1 <= r <= min(A.shape):
        raise RankOutOfRangeError(f"rank {r} outside [1, {min(A.shape)}]")
    U, S, Vh = _svd(A)
    k = effective_rank(S, r)
    return SvdFactors(U[:, :k], S[:k], Vh[:k].conj().T)


def _normalise_columns(vectors: np.ndarray) -> np.ndarray:
    vectors = vectors.astype(complex, copy=False)
    vectors = vectors / np.linalg.norm(vectors, axis=0)
    # largest-magnitude component of each column becomes real-positive
    lead = vectors[np.argmax(np.abs(vectors), axis=0), np.arange(vectors.shape[1])]
    return vectors * (np.abs(lead) / lead)


def eig_general(A) -> EigenPairs:
    """Eigenvalues and unit-norm right eigenvectors of a general square matrix.

    Complex conjugate pairs are returned for real input. Each eigenvector is
    scaled to unit 2-norm with its largest-magnitude entry real and positive.

    Raises
    ------
    ConvergenceFailure
        If the Hessenberg QR iteration exceeds its iteration budget.
    """
    A = _as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise ShapeMismatchError(f"eigendecomposition needs a square matrix, got {A.shape}")
    try:
        values, vectors = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"eigenvalue iteration did not converge: {exc}") from exc
    return EigenPairs(values.astype(complex, copy=False), _normalise_columns(vectors))


def pinv(A) -> np.ndarray:
    """Moore-Penrose pseudo-inverse through the SVD with the relative cutoff."""
    A = _as_matrix(A)
    U, S, Vh = _svd(A)
    k = effective_rank(S, min(A.shape))
    return (Vh[:k].conj().T / S[:k]) @ U[:, :k].conj().T


def spectral_norm(A) -> float:
    """Matrix 2-norm, i.e. the largest singular value."""
    A = _as_matrix(A)
    if not np.any(A):
        return 0.0
    return float(truncated_svd(A, 1).S[0])


def cond2(A) -> float:
    """2-norm condition number ``sigma_max / sigma_min`` (``inf`` if singular)."""
    A = _as_matrix(A)
    S = np.linalg.svd(A, compute_uv=False)
    if S[-1] == 0.0:
        return float("inf")
    return float(S[0] / S[-1])
