"""Unsupervised choice of window, order and rank on a burn-in prefix.

Every candidate ``(w, d, r)`` of a small grid is scored by its average
reconstruction error over the burn-in, and the smallest score wins.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .detector import error_series
from .embedding import as_stream
from .errors import AllCandidatesFailedError, CpdmdError, DataError, EmptyGridError

log = logging.getLogger(__name__)

Candidate = Tuple[int, int, int]


@dataclass(frozen=True)
class GridSpec:
    """Fractions of the burn-in length explored for ``w`` and ``d``.

    Ranks are ``rank_multiplier * k`` for ``k = 1 .. max(p, 2)``; with the
    default multiplier a univariate stream explores ranks 2 and 4.
    """

    window_fractions: Tuple[float, ...] = (0.4, 0.6, 0.8)
    order_fractions: Tuple[float, ...] = (0.05, 0.1, 0.2, 0.4)
    rank_multiplier: int = 2

    def __post_init__(self):
        fractions = tuple(self.window_fractions) + tuple(self.order_fractions)
        if not fractions or any(not 0.0 < f <= 1.0 for f in fractions):
            raise DataError(f"grid fractions must lie in (0, 1], got {fractions}")
        if self.rank_multiplier < 1:
            raise DataError(f"rank multiplier must be a positive integer, got {self.rank_multiplier}")

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """Parse ``"w=0.4,0.6;d=0.1,0.2;m=2"`` (any subset of keys)."""
        kwargs = {}
        keys = {"w": "window_fractions", "d": "order_fractions", "m": "rank_multiplier"}
        for part in filter(None, (p.strip() for p in text.split(";"))):
            key, _, values = part.partition("=")
            if key.strip() not in keys or not values:
                raise DataError(f"bad grid item {part!r}; expected w=..., d=... or m=...")
            name = keys[key.strip()]
            try:
                if name == "rank_multiplier":
                    kwargs[name] = int(values)
                else:
                    kwargs[name] = tuple(float(v) for v in values.split(","))
            except ValueError as exc:
                raise DataError(f"bad grid item {part!r}: {exc}") from exc
        return cls(**kwargs)


def _round_half_up(value: float) -> int:
    return int(Decimal(repr(value)).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def generate_grid(T0: int, p: int, spec: GridSpec = GridSpec()) -> List[Candidate]:
    """Candidate triplets satisfying ``w <= T0``, ``d <= w`` and ``r <= min(p d, w-d+1)``."""
    if T0 < 10:
        raise DataError(f"burn-in must be at least 10 observations, got {T0}")
    ranks = [spec.rank_multiplier * k for k in range(1, max(p, 2) + 1)]
    grid = set()
    for fw in spec.window_fractions:
        w = min(max(_round_half_up(fw * T0), 2), T0)
        for fd in spec.order_fractions:
            d = min(max(_round_half_up(fd * T0), 1), w)
            for r in ranks:
                if r <= min(p * d, w - d + 1):
                    grid.add((w, d, r))
    if not grid:
        raise EmptyGridError(f"no (w, d, r) triplet survives the constraints for T0={T0}, p={p}")
    return sorted(grid)


def average_error(burnin: np.ndarray, candidate: Candidate) -> float:
    """Mean reconstruction error over ``t = w .. T0``; ``inf`` if any step fails."""
    w, d, r = candidate
    try:
        errors = [eps for _, eps in error_series(burnin, w, d, r)]
    except CpdmdError as exc:
        log.debug("candidate %s failed: %s", candidate, exc)
        return math.inf
    value = float(np.mean(errors))
    return value if math.isfinite(value) else math.inf


@dataclass
class SelectionResult:
    best: Candidate
    best_error: float
    table: Dict[Candidate, float] = field(default_factory=dict)

    def write_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("w", "d", "r", "avg_error"))
        for (w, d, r), err in sorted(self.table.items()):
            writer.writerow((w, d, r, repr(err)))


def reduce_candidates(table: Dict[Candidate, float]) -> Tuple[Candidate, float]:
    """Arg-min of the average errors, ties broken by the smallest ``(w, d, r)``."""
    best = min(table, key=lambda c: (table[c], c))
    if not math.isfinite(table[best]):
        raise AllCandidatesFailedError(f"all {len(table)} candidates failed on the burn-in")
    return best, table[best]


def select_hyperparams(burnin, spec: GridSpec = GridSpec(), candidates: Sequence[Candidate] = None) -> SelectionResult:
    """Pick ``(w, d, r)`` minimising the average burn-in reconstruction error.

    ``candidates`` overrides the grid generated from ``spec``.
    """
    x = as_stream(burnin)
    T0, p = x.shape
    if candidates is None:
        candidates = generate_grid(T0, p, spec)
    if not candidates:
        raise EmptyGridError("empty candidate list")
    table = {tuple(c): average_error(x, tuple(c)) for c in candidates}
    best, best_error = reduce_candidates(table)
    return SelectionResult(best, best_error, table)
