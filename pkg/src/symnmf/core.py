"""Matrix plumbing shared by every solver: validation, Gram forms, error metrics, MatrixMarket I/O.

Matrices are plain 2-D float64 numpy arrays. A factor ``W`` is ``n x k``; NNLS
iterates are stored ``k x s`` (one column per right-hand side).
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
import scipy.io
from scipy.linalg.blas import dsyrk


class RankDeficientError(np.linalg.LinAlgError):
    """The least-squares design lost full column rank (zero pivot or zero diagonal)."""


def as_matrix(a, nonnegative: bool = False, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a nonempty, finite, 2-D float64 array.

    Raises ValueError on empty/ragged/non-finite input, or on negative entries
    when ``nonnegative`` is set.
    """
    m = np.asarray(a, dtype=np.float64)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.size == 0:
        raise ValueError(f"{name} must be a nonempty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    if nonnegative and np.any(m < 0):
        raise ValueError(f"{name} must be entrywise nonnegative")
    return m


def gram(C: np.ndarray) -> np.ndarray:
    """C^T C via a symmetric rank-k update; the result is exactly symmetric."""
    C = np.asarray(C, dtype=np.float64)
    upper = dsyrk(1.0, C, trans=1)
    return np.triu(upper) + np.triu(upper, 1).T


@dataclass(frozen=True)
class NnlsSubproblem:
    """Implicit data of ``min_{X>=0} 1/2 ||B - C X||_F^2``.

    Only ``gram = C^T C`` (k x k) and ``cross = C^T B`` (k x s) are kept; the
    solvers never see ``C`` or ``B``.
    """

    gram: np.ndarray
    cross: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gram, dtype=np.float64)
        c = np.asarray(self.cross, dtype=np.float64)
        if c.ndim == 1:
            c = c.reshape(-1, 1)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"gram must be square, got {g.shape}")
        if c.ndim != 2 or c.shape[0] != g.shape[0]:
            raise ValueError(f"cross must have {g.shape[0]} rows, got {c.shape}")
        g.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "gram", g)
        object.__setattr__(self, "cross", c)

    @property
    def k(self) -> int:
        return self.gram.shape[0]

    @property
    def s(self) -> int:
        return self.cross.shape[1]

    def objective(self, X: np.ndarray, bnorm2=None) -> np.ndarray:
        """Per-column objective ``1/2 x^T Q x - x^T p`` (+ ``1/2 ||b||^2`` if given)."""
        X = np.asarray(X, dtype=np.float64).reshape(self.k, -1)
        val = 0.5 * np.einsum("is,is->s", X, self.gram @ X) - np.einsum("is,is->s", X, self.cross)
        if bnorm2 is not None:
            val = val + 0.5 * np.asarray(bnorm2)
        return val

    def gradient(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64).reshape(self.k, -1)
        return self.gram @ X - self.cross


def build_subproblem(C, B) -> NnlsSubproblem:
    C = as_matrix(C, name="C")
    B = as_matrix(B, name="B")
    if C.shape[0] != B.shape[0]:
        raise ValueError(f"row mismatch: C has {C.shape[0]} rows, B has {B.shape[0]}")
    return NnlsSubproblem(gram(C), C.T @ B)


def frobenius_norm(M) -> float:
    M = as_matrix(M)
    return float(np.linalg.norm(M, "fro"))


def max_entry(A) -> float:
    return float(np.max(as_matrix(A)))


def relative_nonsym_error(A, W, H) -> float:
    """||A - W H^T||_F / ||A||_F."""
    A = as_matrix(A, name="A")
    W = as_matrix(W, name="W")
    H = as_matrix(H, name="H")
    if W.shape[1] != H.shape[1] or A.shape != (W.shape[0], H.shape[0]):
        raise ValueError(f"shape mismatch: A {A.shape}, W {W.shape}, H {H.shape}")
    na = np.linalg.norm(A, "fro")
    if na == 0:
        raise ValueError("A is the zero matrix")
    return float(np.linalg.norm(A - W @ H.T, "fro") / na)


def relative_sym_error(A, W) -> float:
    """||A - W W^T||_F / ||A||_F."""
    return relative_nonsym_error(A, W, W)


def degree_of_symmetry(W, H) -> float:
    """||W - H||_F / min(||W||_F, ||H||_F).

    Both factors zero gives 0; exactly one zero gives +inf so that a symmetry
    test can never pass on it.
    """
    W = as_matrix(W, name="W")
    H = as_matrix(H, name="H")
    if W.shape != H.shape:
        raise ValueError(f"shape mismatch: W {W.shape}, H {H.shape}")
    denom = min(np.linalg.norm(W, "fro"), np.linalg.norm(H, "fro"))
    diff = np.linalg.norm(W - H, "fro")
    if denom == 0:
        return 0.0 if diff == 0 else math.inf
    return float(diff / denom)


def read_matrix_market(path: str | os.PathLike) -> np.ndarray:
    """Load a MatrixMarket file (array or coordinate; symmetric tag honored) as a dense array."""
    m = scipy.io.mmread(os.fspath(path))
    if hasattr(m, "toarray"):
        m = m.toarray()
    return as_matrix(m, name=os.fspath(path))


def write_matrix_market(path: str | os.PathLike, M, symmetric: bool | None = None) -> None:
    """Write ``M`` in dense array format with 17 significant digits.

    ``symmetric=None`` tags the file symmetric when ``M`` is exactly symmetric.
    """
    M = as_matrix(M)
    if symmetric is None:
        symmetric = M.shape[0] == M.shape[1] and np.array_equal(M, M.T)
    scipy.io.mmwrite(
        os.fspath(path), M, field="real", precision=17,
        symmetry="symmetric" if symmetric else "general",
    )
