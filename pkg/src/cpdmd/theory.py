"""Numerical checks of the eigen-perturbation behaviour of windowed DMD.

Consecutive windows give two full (unprojected) operators ``A`` and
``A_tilde``; their difference ``E`` is the perturbation whose norm bounds
how far the eigenvalues move (Bauer-Fike). The module also measures the
per-step cost of the detector against its theoretical operation count.
"""

import csv
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .detector import window_error
from .dmd import dmd_operator_full
from .embedding import as_stream, hankelize, make_window
from .errors import ClosedFormMismatchError, DegenerateWindowError, NonDiagonalisableError
from .linalg import SINGULAR_CUTOFF, SvdFactors, cond2, eig_general, spectral_norm, truncated_svd

log = logging.getLogger(__name__)

CLOSED_FORM_RTOL = 1e-6
DIAGONALISABLE_COND = 1e12
RECORD_HEADER = ("t", "e_norm", "cond_phi", "eig_gap", "max_drift", "bound_ok")


def _brand_update(svd: SvdFactors, a: np.ndarray, b: np.ndarray) -> SvdFactors:
    """SVD of ``U diag(S) V^H + a b^H`` from the factors of the first term."""
    U, S, V = svd.U, svd.S, svd.V
    m = U.conj().T @ a
    p = a - U @ m
    ra = np.linalg.norm(p)
    n = V.conj().T @ b
    q = b - V @ n
    rb = np.linalg.norm(q)
    k = S.size
    K = np.zeros((k + 1, k + 1), dtype=np.result_type(U, a))
    K[:k, :k] = np.diag(S)
    K += np.outer(np.append(m, ra), np.append(n, rb).conj())
    P = p / ra if ra > 0 else np.zeros_like(p)
    Q = q / rb if rb > 0 else np.zeros_like(q)
    inner = truncated_svd(K, k + 1)
    U_new = np.column_stack([U, P]) @ inner.U
    V_new = np.column_stack([V, Q]) @ inner.V
    keep = inner.S > SINGULAR_CUTOFF * inner.S[0] if inner.S.size else inner.S > 0
    return SvdFactors(U_new[:, keep], inner.S[keep], V_new[:, keep])


def incremental_svd_update(svd: SvdFactors, dropped: np.ndarray, appended: np.ndarray) -> SvdFactors:
    """Slide a factored matrix by one column: drop the first, append ``appended``.

    ``dropped`` must be the current first column. The result factors the
    shifted matrix using two rank-one updates and a column permutation.
    """
    m = svd.V.shape[0]
    first = np.zeros(m)
    first[0] = 1.0
    removed = _brand_update(svd, -np.asarray(dropped, dtype=float), first)
    # move the emptied first column to the end
    rolled = SvdFactors(removed.U, removed.S, np.roll(removed.V, -1, axis=0))
    last = np.zeros(m)
    last[-1] = 1.0
    return _brand_update(rolled, np.asarray(appended, dtype=float), last)


@dataclass
class PerturbationResult:
    """Operators of two consecutive windows and two evaluations of their difference."""

    A: np.ndarray
    A_tilde: np.ndarray
    E: np.ndarray
    E_closed: np.ndarray
    mismatch: float

    @property
    def agrees(self) -> bool:
        return self.mismatch <= CLOSED_FORM_RTOL


def _hankel_pair(stream, t: int, w: int, d: int):
    x = as_stream(stream)
    H_now = hankelize(make_window(x, t, w), d)
    H_next = hankelize(make_window(x, t + 1, w), d)
    return H_now, H_next


def perturbation_matrix(stream, t: int, w: int, d: int, strict: bool = False) -> PerturbationResult:
    """Perturbation ``E = A_tilde - A`` between the windows ending at ``t`` and ``t + 1``.

    ``E`` is formed directly from the two operators and again from the
    rank-one closed form ``(y - A x) v S^-1 U^H`` built on the slid SVD of the
    lagged snapshot matrix, where ``x, y`` are the newest snapshot pair and
    ``v`` the last row of ``V``. With ``strict`` a relative disagreement above
    ``CLOSED_FORM_RTOL`` raises :class:`ClosedFormMismatchError`.
    """
    H_now, H_next = _hankel_pair(stream, t, w, d)
    A = dmd_operator_full(H_now)
    A_tilde = dmd_operator_full(H_next)
    E = A_tilde - A

    X_now = H_now[:, :-1]
    base = truncated_svd(X_now, min(X_now.shape))
    if base.rank == 0:
        raise DegenerateWindowError("lagged snapshot matrix has numerical rank 0")
    slid = incremental_svd_update(base, X_now[:, 0], H_now[:, -1])
    x_last, y_new = H_next[:, -2], H_next[:, -1]
    residual = y_new - A @ x_last
    E_closed = np.outer(residual, slid.V[-1].conj() / slid.S) @ slid.U.conj().T

    mismatch = float(np.linalg.norm(E - E_closed) / (1.0 + np.linalg.norm(E)))
    if strict and mismatch > CLOSED_FORM_RTOL:
        raise ClosedFormMismatchError(
            f"closed-form perturbation differs from A_tilde - A by {mismatch:.3e} (relative) at t={t}"
        )
    return PerturbationResult(A, A_tilde, E, E_closed, mismatch)


@dataclass
class PerturbationRecord:
    t: int
    E_norm: float
    cond_Phi: float
    eig_gap: float
    max_eig_drift: float
    bound_ok: bool
    eigvec_ratio: float = math.nan

    def row(self) -> tuple:
        return (self.t, repr(self.E_norm), repr(self.cond_Phi), repr(self.eig_gap),
                repr(self.max_eig_drift), int(self.bound_ok))


def _min_gap(values: np.ndarray) -> float:
    if values.size < 2:
        return math.inf
    diff = np.abs(values[:, None] - values[None, :])
    np.fill_diagonal(diff, np.inf)
    return float(diff.min())


def pair_eigenvectors(Phi: np.ndarray, Phi_tilde: np.ndarray) -> List[tuple]:
    """Greedy one-to-one pairing of columns by largest ``|<phi, phi_tilde>|``."""
    overlap = np.abs(Phi.conj().T @ Phi_tilde)
    order = np.dstack(np.unravel_index(np.argsort(-overlap, axis=None), overlap.shape))[0]
    used_a, used_b, pairs = set(), set(), []
    for i, j in order:
        if i in used_a or j in used_b:
            continue
        used_a.add(i)
        used_b.add(j)
        pairs.append((int(i), int(j)))
    return pairs


def eigenvector_ratio(values, Phi, Phi_tilde, e_norm: float) -> float:
    """Largest ``||phi_tilde - phi|| / (||E|| / gap_k)`` over paired eigenvectors.

    A first-order diagnostic; the ratio is not bounded by one in general.
    """
    if e_norm == 0.0:
        return 0.0
    worst = 0.0
    for i, j in pair_eigenvectors(Phi, Phi_tilde):
        others = np.delete(values, i)
        gap = float(np.min(np.abs(others - values[i]))) if others.size else math.inf
        a, b = Phi[:, i], Phi_tilde[:, j]
        # align the phase of b to a before differencing
        inner = np.vdot(b, a)
        if inner != 0:
            b = b * (inner / abs(inner))
        worst = max(worst, float(np.linalg.norm(b - a)) * gap / e_norm)
    return worst


def bauer_fike_from_operators(t: int, A: np.ndarray, A_tilde: np.ndarray) -> PerturbationRecord:
    pairs = eig_general(A)
    cond = cond2(pairs.vectors)
    if not cond < DIAGONALISABLE_COND:
        raise NonDiagonalisableError(f"eigenvector matrix condition number {cond:.3e} at t={t}")
    E = A_tilde - A
    e_norm = spectral_norm(E)
    perturbed = eig_general(A_tilde)
    drift = float(np.max(np.min(np.abs(perturbed.values[:, None] - pairs.values[None, :]), axis=1)))
    bound_ok = drift <= cond * e_norm * (1.0 + 1e-8)
    ratio = eigenvector_ratio(pairs.values, pairs.vectors, perturbed.vectors, e_norm)
    return PerturbationRecord(t, e_norm, cond, _min_gap(pairs.values), drift, bool(bound_ok), ratio)


def check_bauer_fike(stream, t: int, w: int, d: int) -> PerturbationRecord:
    """Compare the eigenvalue drift between windows ``t`` and ``t + 1`` with ``cond(Phi) ||E||``."""
    H_now, H_next = _hankel_pair(stream, t, w, d)
    return bauer_fike_from_operators(t, dmd_operator_full(H_now), dmd_operator_full(H_next))


@dataclass
class BoundSuite:
    records: List[PerturbationRecord] = field(default_factory=list)
    skipped: List[int] = field(default_factory=list)

    @property
    def violations(self) -> int:
        return sum(not r.bound_ok for r in self.records)

    def write_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_HEADER)
        for record in self.records:
            writer.writerow(record.row())


def bauer_fike_suite(stream, w: int, d: int, times: Iterable[int]) -> BoundSuite:
    """Run :func:`check_bauer_fike` at each ``t``; non-diagonalisable steps are skipped and listed."""
    suite = BoundSuite()
    for t in times:
        try:
            suite.records.append(check_bauer_fike(stream, t, w, d))
        except NonDiagonalisableError as exc:
            log.info("skipping t=%d: %s", t, exc)
            suite.skipped.append(t)
    return suite


def theoretical_cost(p: int, w: int, d: int) -> int:
    """Operation count ``p d (w - d) min(p d, w - d)`` of one detector step."""
    return p * d * (w - d) * min(p * d, w - d)


@dataclass(frozen=True)
class TimingRow:
    p: int
    w: int
    d: int
    r: int
    seconds_per_step: float
    theoretical_cost: int


def complexity_bench(
    p_values: Sequence[int],
    w_values: Sequence[int],
    d_values: Optional[Sequence[int]] = None,
    r: int = 2,
    steps: int = 20,
    repeats: int = 3,
    seed: int = 0,
) -> List[TimingRow]:
    """Time one detector step for every ``(p, w, d)`` combination with ``d < w``.

    ``d_values=None`` pairs each ``w`` with ``d = w // 4``. The reported time
    is the best of ``repeats`` passes over ``steps`` consecutive windows.
    """
    rng = np.random.default_rng(seed)
    configs = []
    for p in p_values:
        for w in w_values:
            for d in (d_values if d_values is not None else [max(w // 4, 1)]):
                if 1 <= d < w:
                    configs.append((p, w, d))
    rows = []
    for p, w, d in configs:
        rank = max(1, min(r, p * d, w - d))
        x = rng.standard_normal((w + steps, p)).T
        best = math.inf
        for _ in range(repeats):
            start = time.perf_counter()
            for t in range(w, w + steps):
                window_error(x[:, t - w:t], d, rank)
            best = min(best, (time.perf_counter() - start) / steps)
        rows.append(TimingRow(p, w, d, rank, best, theoretical_cost(p, w, d)))
    return rows


def write_timings(rows: Sequence[TimingRow], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(("p", "w", "d", "r", "seconds_per_step", "theoretical_cost"))
    for row in rows:
        writer.writerow((row.p, row.w, row.d, row.r, repr(row.seconds_per_step), row.theoretical_cost))
