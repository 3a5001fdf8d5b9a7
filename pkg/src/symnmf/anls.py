"""Outer alternating solvers: plain ANLS for ``M ~ W H^T`` and the penalized
symmetric loop for ``A ~ W W^T`` with geometric or adaptive penalty updates."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import (
    NnlsSubproblem,
    as_matrix,
    degree_of_symmetry,
    gram,
    max_entry,
    relative_nonsym_error,
    relative_sym_error,
)
from .nnls_bpp import BppConfig, BppStats, bpp_solve_matrix
from .nnls_gcd import GcdConfig, gcd_solve_matrix

TRACE_FIELDS = ("nu", "beta", "alpha", "eps_S", "eps_N", "delta", "rho", "corrections", "elapsed_s")


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox stream; reproducible across platforms for a given seed."""
    return np.random.Generator(np.random.Philox(seed))


# -- inner solver dispatch ---------------------------------------------------

def inner_solve(sub: NnlsSubproblem, X0: np.ndarray, inner: str, eta: float = 1e-3) -> tuple[np.ndarray, int]:
    """Run the chosen NNLS solver; returns ``(X, work)`` where work is the GCD
    correction count or the BPP exchange count."""
    if inner == "gcd":
        res = gcd_solve_matrix(sub, X0, GcdConfig(eta))
        return res.X, res.corrections
    if inner == "bpp":
        stats = BppStats()
        X = bpp_solve_matrix(sub, X0, BppConfig(), stats)
        return X, stats.exchanges
    raise ValueError(f"unknown inner solver {inner!r}")


# -- general NMF ----------------------------------------------------------------

@dataclass
class AnlsResult:
    W: np.ndarray
    H: np.ndarray
    errors: list[float]
    converged: bool


def anls_nmf(M, k: int, inner: str = "bpp", W0=None, *, eta: float = 1e-3, tol: float = 1e-6,
             max_iter: int = 200, seed: int = 0) -> AnlsResult:
    """Alternating NNLS for ``min ||M - W H^T||_F^2`` over ``W, H >= 0``.

    Stops once ``|e_prev - e| <= tol * e_prev`` or after ``max_iter`` sweeps.
    """
    M = as_matrix(M, nonnegative=True, name="M")
    m, n = M.shape
    if W0 is None:
        W0 = make_rng(seed).random((m, k))
    W = as_matrix(W0, nonnegative=True, name="W0").copy()
    if W.shape != (m, k):
        raise ValueError(f"W0 must be {m}x{k}, got {W.shape}")
    H = np.zeros((n, k))
    errors: list[float] = []
    for nu in range(1, max_iter + 1):
        try:
            H = _half_step(M, W, H, inner, eta)
            W = _half_step(M.T, H, W, inner, eta)
        except np.linalg.LinAlgError as exc:
            raise type(exc)(f"outer iteration {nu}: {exc}") from exc
        e = float(np.linalg.norm(M - W @ H.T, "fro") ** 2)
        errors.append(e)
        if e == 0.0 or (nu > 1 and abs(errors[-2] - e) <= tol * errors[-2]):
            return AnlsResult(W, H, errors, True)
    return AnlsResult(W, H, errors, False)


def _half_step(B, C, X_prev, inner, eta):
    # a zero design admits X = 0 among its minimizers; avoid the singular solve
    if not np.any(C):
        return np.zeros_like(X_prev)
    sub = NnlsSubproblem(gram(C), C.T @ B)
    X, _ = inner_solve(sub, X_prev.T, inner, eta)
    return X.T


# -- symmetric NMF ----------------------------------------------------------------

def penalized_subproblem(A, F, alpha: float) -> NnlsSubproblem:
    """Gram form of ``[A; sqrt(alpha) F^T]`` against ``[F; sqrt(alpha) I]`` without stacking."""
    A = np.asarray(A, dtype=np.float64)
    F = np.asarray(F, dtype=np.float64)
    if F.ndim != 2 or A.shape != (F.shape[0], F.shape[0]):
        raise ValueError(f"shape mismatch: A {A.shape}, F {F.shape}")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    k = F.shape[1]
    G = gram(F)
    G[np.diag_indices(k)] += alpha
    cross = F.T @ A
    if alpha:
        cross += alpha * F.T
    return NnlsSubproblem(G, cross)


def ada_update(beta: float, rho: float, delta: float) -> float:
    if rho < 1 and beta > 8 and (delta < 0.01 or rho < 0.8):
        return beta / 8
    if rho < 1 and beta > 4 and (delta < 0.1 or rho < 0.9):
        return beta / 4
    if rho < 1 and beta > 2:
        return beta / 2
    return beta * min(8.0, rho * rho)


def geometric_update(beta: float, zeta: float) -> float:
    return beta * zeta


def initial_factors(A, k: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """``W0 = R sqrt(||A||_F) / ||R||_F`` with ``R`` uniform on [0, 1); ``H0 = 0``."""
    A = as_matrix(A, name="A")
    n = A.shape[0]
    if not 0 < k < n:
        raise ValueError(f"need 0 < k < n, got k={k}, n={n}")
    R = make_rng(seed).random((n, k))
    W0 = R * (math.sqrt(np.linalg.norm(A, "fro")) / np.linalg.norm(R, "fro"))
    return W0, np.zeros((n, k))


@dataclass(frozen=True)
class SymConfig:
    k: int
    tau1: float = 1e-3
    tau2: float = 0.1
    nu_max: int = 500
    inner: str = "gcd"
    eta: float = 1e-3
    update: str = "ada"  # "ada" | "geometric"
    zeta: float = 1.01
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.tau1 <= 0 or self.tau2 <= 0:
            raise ValueError("tau1 and tau2 must be positive")
        if self.nu_max < 1:
            raise ValueError("nu_max must be >= 1")
        if self.inner not in ("gcd", "bpp"):
            raise ValueError(f"unknown inner solver {self.inner!r}")
        if self.update not in ("ada", "geometric"):
            raise ValueError(f"unknown update {self.update!r}")
        if self.update == "geometric" and not self.zeta > 1:
            raise ValueError("geometric update needs zeta > 1")

    @property
    def label(self) -> str:
        return "ADA" if self.update == "ada" else f"G{self.zeta:g}"


@dataclass
class PenaltyState:
    beta: float
    alpha: float
    eps_S: float
    eps_N: float
    delta: float
    rho: float


@dataclass
class IterationTrace:
    nu: int
    beta: float
    alpha: float
    eps_S: float
    eps_N: float
    delta: float
    rho: float
    corrections: int
    elapsed_s: float

    def row(self) -> tuple:
        return tuple(getattr(self, f) for f in TRACE_FIELDS)


@dataclass
class SymResult:
    W: np.ndarray
    H: np.ndarray
    trace: list[IterationTrace]
    status: str  # "converged" | "cap"
    eps_S0: float
    elapsed_s: float = 0.0
    betas: list[float] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def nu_tot(self) -> int:
        return len(self.trace)

    @property
    def eps_S(self) -> float:
        return self.trace[-1].eps_S

    @property
    def corrections(self) -> int:
        return sum(t.corrections for t in self.trace)


def penalty_state(A, W, H, beta: float, amax: float | None = None) -> PenaltyState:
    """Metrics that drive the stop test and the adaptive update."""
    amax = max_entry(A) if amax is None else amax
    eps_S = relative_sym_error(A, W)
    eps_N = relative_nonsym_error(A, W, H)
    return PenaltyState(beta, beta * amax, eps_S, eps_N, degree_of_symmetry(W, H), _ratio(eps_S, eps_N))


def stop_test(eps_prev: float, eps: float, delta: float, tau1: float = 1e-3, tau2: float = 0.1) -> bool:
    return abs(eps - eps_prev) <= tau1 * eps and delta <= tau2


def first_stop(eps_S0: float, eps_S, deltas, tau1: float = 1e-3, tau2: float = 0.1) -> int | None:
    """1-based index of the first outer iteration passing :func:`stop_test`, or None."""
    prev = eps_S0
    for nu, (e, d) in enumerate(zip(eps_S, deltas), start=1):
        if stop_test(prev, e, d, tau1, tau2):
            return nu
        prev = e
    return None


def _ratio(eps_S: float, eps_N: float) -> float:
    if eps_N > 0:
        return eps_S / eps_N
    return 1.0 if eps_S == 0 else math.inf


def _check_symmetric(A: np.ndarray) -> None:
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got {A.shape}")
    na = np.linalg.norm(A, "fro")
    if na == 0:
        raise ValueError("A is the zero matrix")
    if np.linalg.norm(A - A.T, "fro") > 1e-10 * na:
        raise ValueError("A is not symmetric")


def sym_anls(A, cfg: SymConfig, W0=None, H0=None,
             callback: Callable[[IterationTrace], None] | None = None) -> SymResult:
    """Penalized alternating solver for ``min_{W>=0} ||A - W W^T||_F``.

    Iteration ``nu`` uses ``alpha = beta * max(A)`` with the ``beta`` produced at
    the end of iteration ``nu - 1`` (``beta = 1`` for the first), updates H then
    W warm-started from their previous values, and stops when the relative
    change of ``eps_S`` is at most ``tau1`` and the symmetry defect at most
    ``tau2``.
    """
    A = as_matrix(A, nonnegative=True, name="A")
    _check_symmetric(A)
    t0 = time.monotonic()
    if W0 is None:
        W0, H0 = initial_factors(A, cfg.k, cfg.seed)
    W = as_matrix(W0, nonnegative=True, name="W0").copy()
    H = np.zeros_like(W) if H0 is None else as_matrix(H0, nonnegative=True, name="H0").copy()
    if W.shape != (A.shape[0], cfg.k) or H.shape != W.shape:
        raise ValueError(f"initial factors must be {A.shape[0]}x{cfg.k}")

    amax = max_entry(A)
    beta = 1.0
    eps_prev = relative_sym_error(A, W)
    eps_S0 = eps_prev
    trace: list[IterationTrace] = []
    betas = [beta]
    status = "cap"
    for nu in range(1, cfg.nu_max + 1):
        alpha = beta * amax
        try:
            Ht, work_h = inner_solve(penalized_subproblem(A, W, alpha), H.T, cfg.inner, cfg.eta)
            H = Ht.T
            Wt, work_w = inner_solve(penalized_subproblem(A, H, alpha), W.T, cfg.inner, cfg.eta)
            W = Wt.T
        except np.linalg.LinAlgError as exc:
            raise type(exc)(f"outer iteration {nu}: {exc}") from exc

        st = penalty_state(A, W, H, beta, amax)
        eps_S, delta, rho = st.eps_S, st.delta, st.rho
        row = IterationTrace(nu, st.beta, st.alpha, eps_S, st.eps_N, delta, rho,
                             work_h + work_w, time.monotonic() - t0)
        trace.append(row)
        if callback is not None:
            callback(row)
        if stop_test(eps_prev, eps_S, delta, cfg.tau1, cfg.tau2):
            status = "converged"
            break
        if cfg.update == "ada":
            beta = ada_update(beta, rho, delta)
        else:
            beta = geometric_update(beta, cfg.zeta)
        betas.append(beta)
        eps_prev = eps_S
    return SymResult(W, H, trace, status, eps_S0, time.monotonic() - t0, betas)
