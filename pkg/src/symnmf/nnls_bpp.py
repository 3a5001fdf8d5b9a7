"""Exact NNLS by block principal pivoting with a single-index backup rule.

Every routine works on an :class:`~symnmf.core.NnlsSubproblem`: the restricted
systems are gathered from ``gram``/``cross``, never re-multiplied from ``C``.

Pivoting follows the Kim & Park safeguard. Each column tracks the fewest
violations seen so far (``ninf``) and a budget of ``max_block_failures`` full
exchanges that are allowed not to improve on it. With the budget spent, only
the violating index with the largest position is flipped, until the count
drops below ``ninf`` again.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .core import NnlsSubproblem, RankDeficientError

KKT_TOL = 1e-12


@dataclass(frozen=True)
class IndexPartition:
    active: tuple[int, ...]
    passive: tuple[int, ...]

    def __post_init__(self):
        a, p = set(self.active), set(self.passive)
        if a & p:
            raise ValueError(f"indices both active and passive: {sorted(a & p)}")

    @property
    def k(self) -> int:
        return len(self.active) + len(self.passive)

    @classmethod
    def from_vector(cls, x) -> IndexPartition:
        """Zero entries are active, positive entries passive."""
        x = np.asarray(x)
        return cls(tuple(np.flatnonzero(x <= 0).tolist()), tuple(np.flatnonzero(x > 0).tolist()))

    @classmethod
    def from_mask(cls, passive_mask) -> IndexPartition:
        m = np.asarray(passive_mask, dtype=bool)
        return cls(tuple(np.flatnonzero(~m).tolist()), tuple(np.flatnonzero(m).tolist()))

    def mask(self) -> np.ndarray:
        m = np.zeros(self.k, dtype=bool)
        m[list(self.passive)] = True
        return m


@dataclass(frozen=True)
class BppConfig:
    max_block_failures: int = 3
    max_iterations: int | None = None  # None -> 5 * k

    def __post_init__(self):
        if self.max_block_failures < 1:
            raise ValueError("max_block_failures must be >= 1")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    def iteration_cap(self, k: int) -> int:
        return self.max_iterations if self.max_iterations is not None else 5 * k


@dataclass
class BppStats:
    """Counters accumulated across calls; read by the experiment harness."""

    cholesky: int = 0
    exchanges: int = 0
    backups: int = 0
    sweeps: int = 0


class KktCheck(NamedTuple):
    ok: bool
    passive_violations: np.ndarray  # positions in x_P with x < -tol
    active_violations: np.ndarray  # positions in g_A with g < -tol


class IterationCapError(RuntimeError):
    pass


def kkt_satisfied(x_P, g_A, tol: float = KKT_TOL) -> KktCheck:
    x_P = np.atleast_1d(np.asarray(x_P, dtype=np.float64))
    g_A = np.atleast_1d(np.asarray(g_A, dtype=np.float64))
    pv = np.flatnonzero(x_P < -tol)
    av = np.flatnonzero(g_A < -tol)
    return KktCheck(pv.size == 0 and av.size == 0, pv, av)


def _cholesky(Q_PP: np.ndarray):
    try:
        c = cho_factor(Q_PP, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise RankDeficientError(f"Cholesky breakdown on a {Q_PP.shape[0]}x{Q_PP.shape[0]} passive system") from exc
    if np.any(np.diag(c[0]) <= 0):
        raise RankDeficientError("non-positive Cholesky pivot")
    return c


def solve_passive(sub: NnlsSubproblem, col: int, part: IndexPartition) -> np.ndarray:
    """Solve ``Q_PP z = p_P`` for column ``col`` by Cholesky."""
    P = list(part.passive)
    if not P:
        raise ValueError("passive set is empty")
    fac = _cholesky(sub.gram[np.ix_(P, P)])
    return cho_solve(fac, sub.cross[P, col], check_finite=False)


def _tolerances(p_col: np.ndarray, x_P: np.ndarray) -> tuple[float, float]:
    # round-off aware: absolute 1e-12 for O(1) data, relative beyond
    tol_x = KKT_TOL * max(1.0, float(np.max(np.abs(x_P), initial=0.0)))
    tol_g = KKT_TOL * max(1.0, float(np.max(np.abs(p_col), initial=0.0)))
    return tol_x, tol_g


def bpp_solve_column(sub: NnlsSubproblem, col: int, x0=None, cfg: BppConfig | None = None,
                     stats: BppStats | None = None) -> np.ndarray:
    """Exact minimizer of ``1/2 x^T Q x - p^T x`` over ``x >= 0`` for one column."""
    cfg = cfg or BppConfig()
    k = sub.k
    x0 = np.zeros(k) if x0 is None else np.asarray(x0, dtype=np.float64).reshape(k)
    if np.any(x0 < 0):
        raise ValueError("x0 must be nonnegative")
    Q, p = sub.gram, sub.cross[:, col]
    passive = x0 > 0
    ninf, budget = k + 1, cfg.max_block_failures
    for _ in range(cfg.iteration_cap(k)):
        part = IndexPartition.from_mask(passive)
        x = np.zeros(k)
        if part.passive:
            x[list(part.passive)] = solve_passive(sub, col, part)
            if stats is not None:
                stats.cholesky += 1
        A = list(part.active)
        g_A = Q[A] @ x - p[A]
        tol_x, tol_g = _tolerances(p, x[list(part.passive)])
        pv = np.asarray(part.passive, dtype=int)[x[list(part.passive)] < -tol_x]
        av = np.asarray(A, dtype=int)[g_A < -tol_g]
        viol = np.sort(np.concatenate([pv, av]))
        if viol.size == 0:
            return np.maximum(x, 0.0)
        if viol.size < ninf:
            ninf, budget = viol.size, cfg.max_block_failures
            passive[viol] = ~passive[viol]
        elif budget >= 1:
            budget -= 1
            passive[viol] = ~passive[viol]
        else:
            passive[viol[-1]] = ~passive[viol[-1]]
            if stats is not None:
                stats.backups += 1
        if stats is not None:
            stats.exchanges += 1
    raise IterationCapError(f"column {col}: no KKT point after {cfg.iteration_cap(k)} pivots")


def _solve_groups(Q, P, X, passive, cols, group: bool, stats):
    """Fill ``X[:, cols]`` with the passive-set solutions, one Cholesky per distinct pattern."""
    X[:, cols] = 0.0
    if cols.size == 0:
        return
    if group:
        patterns, inverse = np.unique(passive[:, cols].T, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        buckets = [(patterns[g], cols[inverse == g]) for g in range(len(patterns))]
    else:
        buckets = [(passive[:, c], np.array([c])) for c in cols]
    for pattern, members in buckets:
        idx = np.flatnonzero(pattern)
        if idx.size == 0:
            continue
        try:
            fac = _cholesky(Q[np.ix_(idx, idx)])
        except RankDeficientError as exc:
            raise RankDeficientError(f"columns {members.tolist()}: {exc}") from exc
        if stats is not None:
            stats.cholesky += 1
        X[np.ix_(idx, members)] = cho_solve(fac, P[np.ix_(idx, members)], check_finite=False)


def bpp_solve_matrix(sub: NnlsSubproblem, X0=None, cfg: BppConfig | None = None,
                     stats: BppStats | None = None, group: bool = True) -> np.ndarray:
    """Solve every column of ``sub`` exactly; returns the ``k x s`` minimizer.

    Columns that share a passive set in a sweep share one Cholesky factorization
    when ``group`` is set; the result does not depend on it.
    """
    cfg = cfg or BppConfig()
    Q, P = sub.gram, sub.cross
    k, s = sub.k, sub.s
    X0 = np.zeros((k, s)) if X0 is None else np.asarray(X0, dtype=np.float64).reshape(k, s)
    if np.any(X0 < 0):
        raise ValueError("X0 must be nonnegative")

    passive = X0 > 0
    X = np.zeros((k, s))
    ninf = np.full(s, k + 1)
    budget = np.full(s, cfg.max_block_failures)
    todo = np.arange(s)
    tol_g = KKT_TOL * np.maximum(1.0, np.max(np.abs(P), axis=0))
    cap = cfg.iteration_cap(k)

    for _ in range(cap):
        if stats is not None:
            stats.sweeps += 1
        _solve_groups(Q, P, X, passive, todo, group, stats)
        Xt, Pt = X[:, todo], passive[:, todo]
        Y = Q @ Xt - P[:, todo]
        tol_x = KKT_TOL * np.maximum(1.0, np.max(np.abs(Xt), axis=0))
        viol = (Pt & (Xt < -tol_x)) | (~Pt & (Y < -tol_g[todo]))
        nviol = viol.sum(axis=0)
        bad = nviol > 0
        todo, viol, nviol = todo[bad], viol[:, bad], nviol[bad]
        if todo.size == 0:
            return np.maximum(X, 0.0)

        improved = nviol < ninf[todo]
        spend = ~improved & (budget[todo] >= 1)
        full = improved | spend
        ninf[todo[improved]] = nviol[improved]
        budget[todo[improved]] = cfg.max_block_failures
        budget[todo[spend]] -= 1

        fc = todo[full]
        passive[:, fc] ^= viol[:, full]
        for j in np.flatnonzero(~full):
            i = np.flatnonzero(viol[:, j])[-1]
            passive[i, todo[j]] = ~passive[i, todo[j]]
        if stats is not None:
            stats.exchanges += int(todo.size)
            stats.backups += int((~full).sum())
    raise IterationCapError(f"columns {todo.tolist()}: no KKT point after {cap} sweeps")
