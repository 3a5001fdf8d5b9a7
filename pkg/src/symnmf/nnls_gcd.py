"""Approximate NNLS by greedy coordinate descent.

Each step moves the one coordinate whose exact, feasibility-clamped line
minimization buys the largest decrease ``d_i``. A column stops once its best
``d_i`` drops below ``eta * mu``, where ``mu`` is the largest first-step
decrease over every column of the right-hand side.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numba
import numpy as np

from .core import NnlsSubproblem, RankDeficientError


@dataclass(frozen=True)
class GcdConfig:
    eta: float = 1e-3
    max_corrections_per_column: int | None = None  # None -> 100 * k

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be positive")

    def cap(self, k: int) -> int:
        if self.max_corrections_per_column is not None:
            return self.max_corrections_per_column
        return 100 * k


@dataclass
class GcdColumnState:
    x: np.ndarray
    g: np.ndarray
    corrections: int = 0

    @classmethod
    def start(cls, sub: NnlsSubproblem, col: int, x0=None) -> GcdColumnState:
        x = np.zeros(sub.k) if x0 is None else np.array(x0, dtype=np.float64).reshape(sub.k)
        if np.any(x < 0):
            raise ValueError("x0 must be nonnegative")
        return cls(x, sub.gram @ x - sub.cross[:, col])


class Correction(NamedTuple):
    index: int
    step: float
    decrease: float


class GcdResult(NamedTuple):
    X: np.ndarray
    corrections: int
    capped: np.ndarray  # per column: hit max_corrections_per_column
    mu: float
    per_column: np.ndarray | None = None


def _check_diagonal(Q: np.ndarray) -> np.ndarray:
    diag = np.diag(Q).copy()
    if np.any(diag <= 0):
        bad = np.flatnonzero(diag <= 0).tolist()
        raise RankDeficientError(f"gram diagonal not positive at {bad}")
    return diag


def _steps_and_decreases(g, x, diag):
    """Vectorized step/decrease for every coordinate (columns broadcast)."""
    ratio = g / diag
    lam = np.where(ratio <= x, -ratio, -x)
    return lam, -g * lam - 0.5 * diag * lam * lam


def best_correction(state: GcdColumnState, Q) -> Correction:
    diag = _check_diagonal(np.asarray(Q))
    lam, d = _steps_and_decreases(state.g, state.x, diag)
    i = int(np.argmax(d))  # first maximum
    return Correction(i, float(lam[i]), float(d[i]))


def apply_correction(state: GcdColumnState, Q, corr: Correction) -> None:
    i = corr.index
    if corr.step == -state.x[i]:
        state.x[i] = 0.0
    else:
        state.x[i] += corr.step
    state.g += corr.step * np.asarray(Q)[:, i]
    state.corrections += 1


def compute_mu(sub: NnlsSubproblem, X0=None) -> float:
    """Largest single-coordinate decrease available at ``X0`` over all columns."""
    k, s = sub.k, sub.s
    X0 = np.zeros((k, s)) if X0 is None else np.asarray(X0, dtype=np.float64).reshape(k, s)
    diag = _check_diagonal(sub.gram)[:, None]
    G = sub.gram @ X0 - sub.cross
    _, D = _steps_and_decreases(G, X0, diag)
    return float(max(D.max(), 0.0))


@numba.njit(cache=True, nogil=True)
def _gcd_kernel(Q, diag, Xt, Gt, threshold, cap, counts, capped, log_col, log_idx, log_step, log_dec):
    s, k = Xt.shape
    nlog = log_col.shape[0]
    total = 0
    for h in range(s):
        x = Xt[h]
        g = Gt[h]
        c = 0
        while True:
            best = 0
            dmax = -np.inf
            lam_best = 0.0
            for i in range(k):
                gi = g[i]
                qi = diag[i]
                if gi / qi <= x[i]:
                    lam = -gi / qi
                else:
                    lam = -x[i]
                d = -gi * lam - 0.5 * qi * lam * lam
                if d > dmax:
                    dmax = d
                    best = i
                    lam_best = lam
            if dmax <= 0.0 or dmax < threshold:
                break
            if c >= cap:
                capped[h] = True
                break
            if lam_best == -x[best]:
                x[best] = 0.0
            else:
                x[best] += lam_best
            for t in range(k):
                g[t] += lam_best * Q[best, t]  # Q symmetric: row access
            if total < nlog:
                log_col[total] = h
                log_idx[total] = best
                log_step[total] = lam_best
                log_dec[total] = dmax
            c += 1
            total += 1
        counts[h] = c
    return total


@dataclass
class CorrectionLog:
    """Record of accepted corrections, filled when passed to :func:`gcd_solve_matrix`."""

    size: int
    col: np.ndarray = field(init=False)
    index: np.ndarray = field(init=False)
    step: np.ndarray = field(init=False)
    decrease: np.ndarray = field(init=False)
    count: int = 0

    def __post_init__(self):
        self.col = np.zeros(self.size, dtype=np.int64)
        self.index = np.zeros(self.size, dtype=np.int64)
        self.step = np.zeros(self.size)
        self.decrease = np.zeros(self.size)

    def entries(self):
        n = min(self.count, self.size)
        for j in range(n):
            yield int(self.col[j]), Correction(int(self.index[j]), float(self.step[j]), float(self.decrease[j]))


_NO_LOG = CorrectionLog(0)


def gcd_solve_matrix(sub: NnlsSubproblem, X0=None, cfg: GcdConfig | None = None,
                     log: CorrectionLog | None = None) -> GcdResult:
    """Greedy coordinate descent on every column, in natural column order.

    Returns the ``k x s`` iterate, the total number of corrections, a per-column
    flag for columns that hit the correction cap, and ``mu``.
    """
    cfg = cfg or GcdConfig()
    k, s = sub.k, sub.s
    X0 = np.zeros((k, s)) if X0 is None else np.asarray(X0, dtype=np.float64).reshape(k, s)
    if np.any(X0 < 0):
        raise ValueError("X0 must be nonnegative")
    Q = np.ascontiguousarray(sub.gram)
    diag = _check_diagonal(Q)
    Gt = np.ascontiguousarray((Q @ X0 - sub.cross).T)
    Xt = np.array(X0.T, order="C")  # always a copy; the kernel updates it in place
    _, D = _steps_and_decreases(Gt, Xt, diag[None, :])
    mu = float(max(D.max(), 0.0))

    counts = np.zeros(s, dtype=np.int64)
    capped = np.zeros(s, dtype=np.bool_)
    lg = log or _NO_LOG
    total = _gcd_kernel(Q, diag, Xt, Gt, cfg.eta * mu, cfg.cap(k), counts, capped,
                        lg.col, lg.index, lg.step, lg.decrease)
    if log is not None:
        log.count = int(total)
    return GcdResult(np.ascontiguousarray(Xt.T), int(total), capped, mu, counts)
