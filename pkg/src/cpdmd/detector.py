"""Reconstruction-error monitoring and single changepoint detection.

At every time step the last ``w`` observations are delay-embedded with
order ``d``, decomposed by rank-``r`` DMD and unrolled back to a window.
The normalised reconstruction error is differenced and the increments are
monitored by an adaptive EWMA chart whose centre line and spread come from
running (Welford) moments of the increments themselves.
"""

import csv
import math
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

import numpy as np

from .dmd import dmd
from .embedding import as_stream, hankelize, unroll
from .errors import DataError, InsufficientHistoryError, ShapeMismatchError

TRACE_HEADER = ("t", "epsilon", "delta", "z", "mu", "sigma_z", "alarm")


@dataclass(frozen=True)
class HyperParams:
    T0: int
    w: int
    d: int
    r: int
    lam: float = 0.05
    L: float = 4.5

    def validate(self, p: int = 1) -> "HyperParams":
        if not 2 <= self.w <= self.T0:
            raise DataError(f"need 2 <= w <= T0, got w={self.w}, T0={self.T0}")
        if not 1 <= self.d <= self.w:
            raise DataError(f"need 1 <= d <= w, got d={self.d}, w={self.w}")
        if not 1 <= self.r <= min(p * self.d, self.w - self.d + 1):
            raise DataError(
                f"need 1 <= r <= min(p*d, w-d+1) = {min(p * self.d, self.w - self.d + 1)}, "
                f"got r={self.r}"
            )
        if not 0.0 <= self.lam <= 1.0:
            raise DataError(f"lambda must lie in [0, 1], got {self.lam}")
        if not self.L > 0:
            raise DataError(f"control limit must be positive, got {self.L}")
        return self


def reconstruction_error(X, X_hat) -> float:
    """Mean squared entry-wise error ``||X - X_hat||_F^2 / (p w)``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    X_hat = np.atleast_2d(np.asarray(X_hat, dtype=float))
    if X.shape != X_hat.shape:
        raise ShapeMismatchError(f"shapes differ: {X.shape} vs {X_hat.shape}")
    diff = X - X_hat
    return float(np.vdot(diff, diff).real / diff.size)


def window_error(X: np.ndarray, d: int, r: int) -> float:
    """Reconstruction error of one ``(p, w)`` window under rank-``r`` Hankel DMD."""
    p = X.shape[0]
    X_hat = unroll(dmd(hankelize(X, d), r).reconstruction, p, d)
    return reconstruction_error(X, X_hat)


def error_series(stream, w: int, d: int, r: int, stop: Optional[int] = None) -> Iterator[Tuple[int, float]]:
    """Yield ``(t, epsilon_t)`` for ``t = w .. stop`` (default: end of stream)."""
    x = as_stream(stream)
    T = x.shape[0] if stop is None else stop
    if T < w:
        raise InsufficientHistoryError(f"stream of length {T} is shorter than the window {w}")
    xt = x.T
    for t in range(w, T + 1):
        yield t, window_error(xt[:, t - w:t], d, r)


@dataclass
class DetectorState:
    """Mutable adaptive-EWMA state for one monitored increment stream.

    ``count`` is the number of increments consumed and doubles as the EWMA
    time index; ``mean`` and ``var`` are the running mean and population
    variance of those increments.
    """

    t: int = 0
    prev_error: Optional[float] = None
    z: float = 0.0
    mean: float = 0.0
    var: float = 0.0
    count: int = 0
    sigma_z: float = 0.0
    detected: Optional[int] = None


def welford_update(state: DetectorState, y: float) -> DetectorState:
    n = state.count + 1
    prev_mean = state.mean
    # incremental forms of the weighted-average updates; exact for constant input
    state.mean = prev_mean + (y - prev_mean) / n
    state.var = state.var + ((y - state.mean) * (y - prev_mean) - state.var) / n
    state.count = n
    return state


def ewma_step(state: DetectorState, delta: float, lam: float, L: float) -> Tuple[DetectorState, bool]:
    """Consume one increment; return the state and whether it lies outside the limits.

    The running moments are updated with ``delta`` before the limits are
    formed, and the comparison is strict.
    """
    welford_update(state, delta)
    n = state.count
    state.z = delta if n == 1 else state.z + lam * (delta - state.z)
    spread = lam / (2.0 - lam) * (1.0 - (1.0 - lam) ** (2 * n))
    state.sigma_z = math.sqrt(max(state.var, 0.0)) * math.sqrt(spread)
    limit = L * state.sigma_z
    alarm = state.z > state.mean + limit or state.z < state.mean - limit
    return state, alarm


@dataclass
class Trace:
    """Per-step diagnostics of a monitored stream (one row per error)."""

    rows: List[tuple] = field(default_factory=list)

    def append(self, t, epsilon, delta=None, z=None, mu=None, sigma_z=None, alarm=False):
        self.rows.append((t, epsilon, delta, z, mu, sigma_z, alarm))

    def column(self, name: str) -> np.ndarray:
        i = TRACE_HEADER.index(name)
        return np.array([np.nan if row[i] is None else row[i] for row in self.rows], dtype=float)

    def write_csv(self, fh, offset: int = 0, header: bool = True) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        if header:
            writer.writerow(TRACE_HEADER)
        for t, *values, alarm in self.rows:
            writer.writerow(
                [t + offset] + ["" if v is None else repr(float(v)) for v in values] + [int(alarm)]
            )


class EwmaMonitor:
    """Adaptive EWMA applied to the increments of an error sequence.

    Feed errors in time order with :meth:`push`; alarms at or before the
    burn-in ``T0`` are ignored.
    """

    def __init__(self, T0: int, lam: float, L: float, trace: Optional[Trace] = None):
        self.T0 = T0
        self.lam = lam
        self.L = L
        self.state = DetectorState()
        self.trace = trace

    def push(self, t: int, epsilon: float) -> bool:
        state = self.state
        state.t = t
        if state.prev_error is None:
            state.prev_error = epsilon
            if self.trace is not None:
                self.trace.append(t, epsilon)
            return False
        delta = epsilon - state.prev_error
        state.prev_error = epsilon
        _, alarm = ewma_step(state, delta, self.lam, self.L)
        if self.trace is not None:
            self.trace.append(t, epsilon, delta, state.z, state.mean, state.sigma_z, alarm)
        if alarm and t > self.T0 and state.detected is None:
            state.detected = t
            return True
        return False


@dataclass
class SingleCpResult:
    detection: Optional[int]
    trace: Optional[Trace]


def single_cp(stream, params: HyperParams, keep_trace: bool = True) -> SingleCpResult:
    """Return the first time ``t > T0`` at which the chart raises an alarm.

    Times are 1-based and relative to the start of ``stream``.
    """
    x = as_stream(stream)
    params.validate(x.shape[1])
    if x.shape[0] < params.w:
        raise InsufficientHistoryError(
            f"stream of length {x.shape[0]} is shorter than the window {params.w}"
        )
    trace = Trace() if keep_trace else None
    monitor = EwmaMonitor(params.T0, params.lam, params.L, trace)
    for t, eps in error_series(x, params.w, params.d, params.r):
        if monitor.push(t, eps):
            return SingleCpResult(t, trace)
    return SingleCpResult(None, trace)
