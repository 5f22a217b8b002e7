"""Classical EWMA control chart on the raw stream, used as a comparison baseline.

The in-control mean and standard deviation are estimated once from the
burn-in prefix and then held fixed.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DataError, DegenerateBurnInError, InsufficientHistoryError


@dataclass(frozen=True)
class EwmaBaselineParams:
    T0: int = 100
    lam: float = 0.05
    L: float = 2.5

    def __post_init__(self):
        if self.T0 < 2:
            raise DataError(f"burn-in must hold at least 2 observations, got {self.T0}")
        if not 0.0 <= self.lam <= 1.0:
            raise DataError(f"lambda must lie in [0, 1], got {self.lam}")
        if not self.L > 0:
            raise DataError(f"control limit must be positive, got {self.L}")


def _univariate(stream) -> np.ndarray:
    x = np.asarray(stream, dtype=float)
    if x.ndim == 2 and x.shape[1] == 1:
        x = x[:, 0]
    if x.ndim != 1:
        raise DataError(f"the EWMA baseline needs a univariate stream, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DataError("stream contains non-finite values")
    return x


def burnin_moments(x: np.ndarray, T0: int):
    mu = float(np.mean(x[:T0]))
    sigma = float(np.std(x[:T0], ddof=1))
    if sigma == 0.0:
        raise DegenerateBurnInError(f"burn-in of {T0} observations has zero spread")
    return mu, sigma


def ewma_statistic(x, lam: float, z0: float) -> np.ndarray:
    """``Z_t = (1 - lam) Z_{t-1} + lam x_t`` for ``t = 1 .. T`` starting from ``z0``."""
    z = np.empty(len(x))
    prev = z0
    for i, value in enumerate(x):
        prev = (1.0 - lam) * prev + lam * value
        z[i] = prev
    return z


def ewma_detect(stream, params: EwmaBaselineParams = EwmaBaselineParams()) -> Optional[int]:
    """First 1-based time ``t > T0`` with ``|Z_t - mu| > L sigma_Z(t)``, or ``None``."""
    x = _univariate(stream)
    if x.size <= params.T0:
        raise InsufficientHistoryError(f"stream of length {x.size} does not exceed the burn-in {params.T0}")
    mu, sigma = burnin_moments(x, params.T0)
    lam, L = params.lam, params.L
    z = ewma_statistic(x, lam, mu)
    t = np.arange(1, x.size + 1)
    sigma_z = sigma * np.sqrt(lam / (2.0 - lam) * (1.0 - (1.0 - lam) ** (2 * t)))
    outside = (z > mu + L * sigma_z) | (z < mu - L * sigma_z)
    outside[: params.T0] = False
    hits = np.flatnonzero(outside)
    return int(hits[0]) + 1 if hits.size else None

