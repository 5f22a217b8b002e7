"""Multiple changepoint detection by restarting the single-change detector.

After each detection the hyperparameters are re-selected on the first
``T0`` observations following it, and monitoring resumes from the
detection time.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import List, Optional

from .detector import HyperParams, Trace, single_cp
from .embedding import as_stream
from .errors import AllCandidatesFailedError
from .selection import GridSpec, select_hyperparams

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Segment:
    start: int
    end: int
    w: int
    d: int
    r: int


@dataclass
class ChangepointReport:
    changepoints: List[int] = field(default_factory=list)
    segments: List[Segment] = field(default_factory=list)
    traces: List[Trace] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "changepoints": list(self.changepoints),
            "segments": [
                {"start": s.start, "end": s.end, "w": s.w, "d": s.d, "r": s.r}
                for s in self.segments
            ],
        }

    def to_json(self, **extra) -> str:
        payload = self.to_dict()
        payload.update(extra)
        return json.dumps(payload, sort_keys=False)

    def write_traces(self, fh) -> None:
        """Write all segment traces as one CSV with absolute time indices."""
        for i, (segment, trace) in enumerate(zip(self.segments, self.traces)):
            trace.write_csv(fh, offset=segment.start - 1, header=(i == 0))


def detect_all(
    stream,
    T0: int = 100,
    lam: float = 0.05,
    L: float = 4.5,
    spec: GridSpec = GridSpec(),
    keep_traces: bool = False,
    max_changepoints: Optional[int] = None,
) -> ChangepointReport:
    """Detect successive changepoints; times in the report are absolute and 1-based."""
    x = as_stream(stream)
    T = x.shape[0]
    report = ChangepointReport()
    start = 1
    while T - start + 1 >= T0:
        if max_changepoints is not None and len(report.changepoints) >= max_changepoints:
            break
        segment = x[start - 1:]
        try:
            selection = select_hyperparams(segment[:T0], spec)
        except AllCandidatesFailedError as exc:
            message = f"segment starting at {start}: {exc}"
            log.warning(message)
            report.warnings.append(message)
            break
        w, d, r = selection.best
        params = HyperParams(T0=T0, w=w, d=d, r=r, lam=lam, L=L)
        result = single_cp(segment, params, keep_trace=keep_traces)
        if keep_traces:
            report.traces.append(result.trace)
        if result.detection is None:
            report.segments.append(Segment(start, T, w, d, r))
            break
        detected = start + result.detection - 1
        report.segments.append(Segment(start, detected, w, d, r))
        report.changepoints.append(detected)
        start = detected
    return report
