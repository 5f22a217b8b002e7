"""Windowed batches, block-Hankel embedding and its causal inverse.

A stream is stored as an array of shape ``(T, p)``, one observation per
row; time indices are 1-based so that ``stream[t - 1]`` is ``x_t``.
Windowed batches are ``(p, w)`` arrays whose columns are consecutive
observations.
"""

import numpy as np

from .errors import InsufficientHistoryError, OrderOutOfRangeError, ShapeMismatchError


def as_stream(data) -> np.ndarray:
    """Coerce a sequence of p-vectors (or scalars) to a float ``(T, p)`` array."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ShapeMismatchError(f"stream must be 1-D or 2-D, got {arr.ndim}-D")
    return arr


def make_window(history, t: int, w: int) -> np.ndarray:
    """Return the ``(p, w)`` batch ``[x_{t-w+1}, ..., x_t]``."""
    history = as_stream(history)
    if w < 1:
        raise ShapeMismatchError(f"window length must be positive, got {w}")
    if t < w or t > history.shape[0]:
        raise InsufficientHistoryError(
            f"window of length {w} at t={t} needs observations 1..{t}, "
            f"have {history.shape[0]}"
        )
    return history[t - w:t].T


def _hankel_index(w: int, d: int) -> np.ndarray:
    return np.arange(d)[:, None] + np.arange(w - d + 1)[None, :]


def hankelize(X, d: int) -> np.ndarray:
    """Stack the per-component ``d x (w-d+1)`` Hankel blocks of a window.

    Block ``j`` occupies rows ``j*d .. (j+1)*d - 1`` and has entry
    ``(i, k) = X[j, i + k]``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    p, w = X.shape
    if not 1 <= d <= w:
        raise OrderOutOfRangeError(f"order d={d} outside [1, {w}]")
    return X[:, _hankel_index(w, d)].reshape(p * d, w - d + 1)


def unroll(H, p: int, d: int) -> np.ndarray:
    """Recover a ``(p, w)`` window from a (reconstructed) Hankel batch.

    Each block is read along its first row and then down its last column,
    the most causal of the possible paths.
    """
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != p * d or d < 1:
        raise ShapeMismatchError(
            f"Hankel batch of shape {H.shape} does not match p={p}, d={d}"
        )
    blocks = H.reshape(p, d, H.shape[1])
    return np.concatenate([blocks[:, 0, :], blocks[:, 1:, -1]], axis=1)
