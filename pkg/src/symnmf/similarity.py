"""Test-matrix builders: random low-rank products, similarity graphs from data
vectors, and synthetic clustered point clouds in the plane."""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist, squareform

from .anls import make_rng
from .core import as_matrix

SYNTHETIC_KINDS = ("wsn", "sc", "sk", "dd")
NOISE_LABEL = -1


@dataclass(frozen=True)
class PointSet:
    points: np.ndarray  # (n, 2)
    labels: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("point set must be a nonempty (n, d) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.asarray(self.labels, dtype=np.int64)
            if lab.shape != (pts.shape[0],):
                raise ValueError("one label per point required")
            object.__setattr__(self, "labels", lab)

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class KernelConfig:
    mode: str = "knn7"  # "knn7" | "diameter" | "explicit"
    sigma: float | None = None

    def __post_init__(self):
        if self.mode not in ("knn7", "diameter", "explicit"):
            raise ValueError(f"unknown sigma mode {self.mode!r}")
        if self.mode == "explicit" and not (self.sigma and self.sigma > 0):
            raise ValueError("explicit sigma must be positive")

    def resolve(self, points) -> float:
        if self.mode == "knn7":
            return sigma_knn7(points)
        if self.mode == "diameter":
            return sigma_diameter(points)
        return float(self.sigma)


def random_lowrank(n: int, p: int, seed: int = 0) -> np.ndarray:
    """``V V^T`` with ``V`` (n x p) uniform on [0, 1)."""
    if not 1 <= p <= n:
        raise ValueError(f"need 1 <= p <= n, got p={p}, n={n}")
    V = make_rng(seed).random((n, p))
    A = V @ V.T
    return 0.5 * (A + A.T)


def cosine_similarity(M) -> np.ndarray:
    """Cosine of the angle between columns of ``M``, with a zero diagonal."""
    M = as_matrix(M, name="M")
    norms = np.linalg.norm(M, axis=0)
    if np.any(norms == 0):
        raise ValueError(f"zero columns: {np.flatnonzero(norms == 0).tolist()}")
    U = M / norms
    A = U.T @ U
    A = 0.5 * (A + A.T)
    np.fill_diagonal(A, 0.0)
    return np.clip(A, -1.0, 1.0)


def _points(points) -> np.ndarray:
    if isinstance(points, PointSet):
        return points.points
    P = np.asarray(points, dtype=np.float64)
    return P.reshape(-1, 1) if P.ndim == 1 else P


def gaussian_kernel(points, sigma: float) -> np.ndarray:
    """``exp(-||m_i - m_j||^2 / sigma^2)`` off the diagonal, zero on it; rows are points."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    P = _points(points)
    D2 = squareform(pdist(P, "sqeuclidean"))
    E = np.exp(-D2 / (sigma * sigma))
    np.fill_diagonal(E, 0.0)
    return E


def normalized_cut(E) -> np.ndarray:
    """``D^{-1/2} E D^{-1/2}`` with ``D`` the row sums of ``E``."""
    E = as_matrix(E, nonnegative=True, name="E")
    d = E.sum(axis=1)
    if np.any(d <= 0):
        raise ValueError(f"isolated points (zero degree): {np.flatnonzero(d <= 0).tolist()}")
    s = 1.0 / np.sqrt(d)
    A = s[:, None] * E * s[None, :]
    return 0.5 * (A + A.T)


def sigma_knn7(points) -> float:
    """Mean distance from each point to its 7th nearest other point."""
    P = _points(points)
    if P.shape[0] < 8:
        raise ValueError("need at least 8 points")
    dist, _ = cKDTree(P).query(P, k=8)
    # self sits at distance 0 among the 8 smallest, so column 7 is the 7th other point
    return float(np.mean(np.sort(dist, axis=1)[:, 7]))


def sigma_diameter(points) -> float:
    """``sqrt(2)/10`` times the largest pairwise distance."""
    P = _points(points)
    if P.shape[0] < 2:
        raise ValueError("need at least 2 points")
    return math.sqrt(2) / 10 * float(pdist(P).max())


def kernel_similarity(points, cfg: KernelConfig = KernelConfig()) -> np.ndarray:
    """Gaussian kernel followed by the normalized cut."""
    sigma = cfg.resolve(points)
    if not sigma > 0:
        raise ValueError("degenerate point set: sigma is zero")
    return normalized_cut(gaussian_kernel(points, sigma))


# -- synthetic 2-D clusters ----------------------------------------------------

def _split(n: int, weights) -> list[int]:
    w = np.asarray(weights, dtype=np.float64)
    sizes = np.floor(n * w / w.sum()).astype(int)
    sizes[0] += n - sizes.sum()
    return sizes.tolist()


def _blobs(rng, centers, stds, sizes):
    pts, lab = [], []
    for c, (center, std, m) in enumerate(zip(centers, stds, sizes)):
        pts.append(rng.normal(center, std, size=(m, 2)))
        lab.append(np.full(m, c))
    return pts, lab


def gen_synthetic(kind: str, n: int, seed: int = 0) -> PointSet:
    """Clustered points in the unit square.

    wsn: five equal blobs plus 5% uniform noise (label -1); sc: three clusters,
    two of them made of two sub-blobs; sk: three blobs with spreads 1:2:4;
    dd: four blobs with sizes 8:4:2:1.
    """
    kind = kind.lower()
    if kind not in SYNTHETIC_KINDS:
        raise ValueError(f"unknown synthetic kind {kind!r}; expected one of {SYNTHETIC_KINDS}")
    if n < 100:
        raise ValueError("n must be at least 100")
    rng = make_rng(seed)
    if kind == "wsn":
        n_noise = n // 20
        centers = [(0.2, 0.2), (0.8, 0.2), (0.5, 0.5), (0.2, 0.8), (0.8, 0.8)]
        pts, lab = _blobs(rng, centers, [0.05] * 5, _split(n - n_noise, [1] * 5))
        pts.append(rng.random((n_noise, 2)))
        lab.append(np.full(n_noise, NOISE_LABEL))
    elif kind == "sc":
        # cluster 0 is a single blob; clusters 1 and 2 each have two sub-blobs
        centers = [(0.25, 0.25), (0.70, 0.18), (0.86, 0.36), (0.22, 0.72), (0.40, 0.86)]
        sizes = _split(n, [2, 1, 1, 1, 1])
        pts, _ = _blobs(rng, centers, [0.06, 0.035, 0.035, 0.035, 0.035], sizes)
        lab = [np.full(m, c) for m, c in zip(sizes, [0, 1, 1, 2, 2])]
    elif kind == "sk":
        centers = [(0.2, 0.3), (0.7, 0.3), (0.5, 0.8)]
        pts, lab = _blobs(rng, centers, [0.025, 0.05, 0.1], _split(n, [1, 1, 1]))
    else:
        centers = [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)]
        pts, lab = _blobs(rng, centers, [0.06] * 4, _split(n, [8, 4, 2, 1]))
    return PointSet(np.vstack(pts), np.concatenate(lab))


# -- CSV ingestion -------------------------------------------------------------

def read_points_csv(path: str | os.PathLike) -> PointSet:
    """Rows ``x,y[,label]``; a non-numeric first row is treated as a header."""
    rows = _read_rows(path)
    if not rows:
        raise ValueError(f"{path}: no points")
    width = len(rows[0])
    if width not in (2, 3) or any(len(r) != width for r in rows):
        raise ValueError(f"{path}: expected rows of x,y or x,y,label")
    data = np.array(rows, dtype=np.float64)
    labels = data[:, 2].astype(np.int64) if width == 3 else None
    return PointSet(data[:, :2], labels)


def write_points_csv(path: str | os.PathLike, ps: PointSet) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for j, (x, y) in enumerate(ps.points):
            w.writerow([repr(float(x)), repr(float(y))] + ([int(ps.labels[j])] if ps.labels is not None else []))


def read_vectors_csv(path: str | os.PathLike) -> np.ndarray:
    """One data vector per row; returns the (n, d) array."""
    rows = _read_rows(path)
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise ValueError(f"{path}: empty or ragged vector file")
    return np.array(rows, dtype=np.float64)


def _read_rows(path) -> list[list[float]]:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if rows:
        try:
            [float(c) for c in rows[0]]
        except ValueError:
            rows = rows[1:]
    return [[float(c) for c in r] for r in rows]
