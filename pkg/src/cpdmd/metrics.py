"""Detection quality metrics: margin-based precision/recall/F1, run lengths, covering."""

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DataError, NoValidRunsError


@dataclass(frozen=True)
class MarginSpec:
    """Acceptance window ``[tau - mu_l, tau + mu_r]`` around a true changepoint."""

    mu_l: int = 0
    mu_r: int = 30

    def __post_init__(self):
        if self.mu_l < 0 or self.mu_r < 0:
            raise DataError(f"margins must be nonnegative, got ({self.mu_l}, {self.mu_r})")

    @classmethod
    def parse(cls, text: str) -> "MarginSpec":
        """Parse ``"left,right"`` or ``"left/right"``."""
        parts = text.replace("/", ",").split(",")
        try:
            left, right = (int(v) for v in parts)
        except ValueError as exc:
            raise DataError(f"margins must look like '0,30', got {text!r}") from exc
        return cls(left, right)

    def accepts(self, tau: int, detection: int) -> bool:
        return -self.mu_l <= detection - tau <= self.mu_r


@dataclass(frozen=True)
class EvalResult:
    """Scores plus the counts behind them.

    ``tp_count`` is the number of true changepoints with a detection in
    their window; ``matched_count`` is the number of detections inside some
    true changepoint's window. They differ only when one detection is close
    to several changepoints or one changepoint attracts several detections.
    """

    precision: float
    recall: float
    f1: float
    tp_count: int
    detection_count: int
    truth_count: int
    matched_count: int = 0


def prf1_from_counts(tp: int, detections: int, truths: int, matched: Optional[int] = None) -> EvalResult:
    """Precision and recall from pooled counts; an empty denominator gives 0.

    ``matched`` (detections inside some window) defaults to ``tp``.
    """
    matched = tp if matched is None else matched
    precision = matched / detections if detections else 0.0
    recall = tp / truths if truths else 0.0
    denom = precision + recall
    f1 = 2 * precision * recall / denom if denom > 0 else 0.0
    return EvalResult(precision, recall, f1, tp, detections, truths, matched)


def true_positives(truth: Sequence[int], detections: Sequence[int], margins: MarginSpec = MarginSpec()) -> int:
    """Number of true changepoints with at least one detection in their window.

    One detection may validate several nearby changepoints.
    """
    return sum(any(margins.accepts(tau, det) for det in detections) for tau in truth)


def matched_detections(truth: Sequence[int], detections: Sequence[int], margins: MarginSpec = MarginSpec()) -> int:
    return sum(any(margins.accepts(tau, det) for tau in truth) for det in detections)


def prf1(truth: Sequence[int], detections: Sequence[int], margins: MarginSpec = MarginSpec()) -> EvalResult:
    tp = true_positives(truth, detections, margins)
    matched = matched_detections(truth, detections, margins)
    return prf1_from_counts(tp, len(detections), len(truth), matched)


def aggregate_prf1(
    runs: Iterable[Tuple[Sequence[int], Sequence[int]]], margins: MarginSpec = MarginSpec()
) -> EvalResult:
    """Pool true positives, detections and truths over many ``(truth, detections)`` runs."""
    tp = matched = n_det = n_truth = 0
    for truth, detections in runs:
        tp += true_positives(truth, detections, margins)
        matched += matched_detections(truth, detections, margins)
        n_det += len(detections)
        n_truth += len(truth)
    return prf1_from_counts(tp, n_det, n_truth, matched)


def _mean_sd(values: Sequence[float]) -> Tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), sd


def arl1(runs: Sequence[Tuple[int, Optional[int]]]) -> Tuple[float, float]:
    """Mean and sample SD of the delay ``detection - tau`` over runs detected at or after ``tau``."""
    if not runs:
        raise DataError("no runs given")
    delays = [det - tau for tau, det in runs if det is not None and det >= tau]
    if not delays:
        raise NoValidRunsError(f"none of the {len(runs)} runs detected the change at or after it occurred")
    return _mean_sd(delays)


def arl0(run_lengths: Sequence[float]) -> Tuple[float, float]:
    """Mean and sample SD of run lengths; censored runs enter at their truncation length."""
    if len(run_lengths) == 0:
        raise DataError("no runs given")
    return _mean_sd(run_lengths)


def run_length(detection: Optional[int], T: int, T0: int) -> int:
    """Observations monitored after the burn-in until the first alarm, or ``T - T0`` if none."""
    return (T if detection is None else detection) - T0


def _segments(cps: Iterable[int], T: int) -> List[Tuple[int, int]]:
    bounds = sorted({1, T + 1} | {int(c) for c in cps if 1 < c <= T})
    return [(a, b - 1) for a, b in zip(bounds[:-1], bounds[1:])]


def _jaccard(a: Tuple[int, int], b: Tuple[int, int]) -> float:
    inter = min(a[1], b[1]) - max(a[0], b[0]) + 1
    if inter <= 0:
        return 0.0
    union = (a[1] - a[0] + 1) + (b[1] - b[0] + 1) - inter
    return inter / union


def covering(truth: Sequence[int], detections: Sequence[int], T: int) -> float:
    """Length-weighted best Jaccard overlap of each true segment with a predicted one."""
    if T < 1:
        raise DataError(f"length must be positive, got {T}")
    for c in list(truth) + list(detections):
        if not 1 <= c <= T:
            raise DataError(f"changepoint {c} outside [1, {T}]")
    truth_segments = _segments(truth, T)
    predicted = _segments(detections, T)
    total = 0.0
    for seg in truth_segments:
        total += (seg[1] - seg[0] + 1) * max(_jaccard(seg, other) for other in predicted)
    return total / T


def format_mean_sd(mean: float, sd: float) -> str:
    if math.isnan(mean):
        return "n/a"
    return f"{mean:.2f} ({sd:.2f})"
