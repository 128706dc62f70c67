"""Clustering metrics, preprocessing and synthetic data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UsageError


@dataclass
class LabeledDataset:
    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        if len(self.points) != len(self.labels):
            raise UsageError("points and labels differ in length")

    def __len__(self) -> int:
        return len(self.labels)


def _contingency(a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise UsageError(f"label vectors must be 1-D and equal length, got {a.shape} and {b.shape}")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max(initial=-1) + 1, ib.max(initial=-1) + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    return table


def _pairs(x: np.ndarray) -> float:
    x = x.astype(np.float64)
    return float((x * (x - 1) / 2).sum())


def ari(a, b) -> float:
    """Adjusted Rand index between two labelings."""
    table = _contingency(a, b)
    n = int(table.sum())
    if n < 2:
        raise UsageError("ARI needs at least two labels")
    index = _pairs(table)
    sum_a = _pairs(table.sum(axis=1))
    sum_b = _pairs(table.sum(axis=0))
    expected = sum_a * sum_b / (n * (n - 1) / 2)
    max_index = (sum_a + sum_b) / 2
    if max_index == expected:
        # both partitions trivial (all-one-block or all-singletons) and equal
        return 1.0
    return (index - expected) / (max_index - expected)


def _entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def nmi(a, b) -> float:
    """Mutual information normalised by the arithmetic mean of the entropies.

    Returns 0.0 when both labelings are a single block (0/0 taken as 0).
    """
    table = _contingency(a, b)
    n = table.sum()
    if n < 1:
        raise UsageError("NMI needs at least one label")
    h_a = _entropy(table.sum(axis=1))
    h_b = _entropy(table.sum(axis=0))
    if h_a == 0.0 or h_b == 0.0:
        return 0.0
    nz = table > 0
    pij = table[nz] / n
    pi = (table.sum(axis=1) / n)[:, None].repeat(table.shape[1], axis=1)[nz]
    pj = (table.sum(axis=0) / n)[None, :].repeat(table.shape[0], axis=0)[nz]
    mi = float((pij * np.log(pij / (pi * pj))).sum())
    return min(1.0, max(0.0, mi / ((h_a + h_b) / 2)))


def hausdorff(a, b) -> float:
    """Symmetric Hausdorff distance between two finite point sets (Euclidean)."""
    A = np.atleast_2d(np.asarray(a, dtype=np.float64))
    B = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if A.size == 0 or B.size == 0:
        raise UsageError("hausdorff distance needs two non-empty sets")
    if A.shape[1] != B.shape[1]:
        raise UsageError("point sets differ in dimension")
    return max(_directed(A, B), _directed(B, A))


def _directed(A: np.ndarray, B: np.ndarray) -> float:
    worst = 0.0
    step = max(1, 2_000_000 // max(len(B), 1))
    for s in range(0, len(A), step):
        d2 = ((A[s:s + step, None, :] - B[None, :, :]) ** 2).sum(axis=2)
        worst = max(worst, float(d2.min(axis=1).max()))
    return float(np.sqrt(worst))


def standardize(points) -> np.ndarray:
    """Zero mean, unit population variance per column; constant columns become 0."""
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2 or len(X) < 2:
        raise UsageError("standardize needs an (n, d) matrix with n >= 2")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    centered = X - mean
    out = np.zeros_like(X)
    ok = std > 0
    out[:, ok] = centered[:, ok] / std[ok]
    return out


def generate_blobs(
    n: int,
    n_clusters: int,
    d: int,
    center_spread: float = 10.0,
    sigma: float = 0.5,
    seed: int = 0,
) -> LabeledDataset:
    """Isotropic Gaussian mixture with centres uniform in a cube.

    Points are grouped by cluster (cluster 0 first); shuffle before streaming
    if a random arrival order is wanted.
    """
    if not (n >= n_clusters >= 1 and d >= 1):
        raise UsageError("need n >= n_clusters >= 1 and d >= 1")
    if not sigma >= 0:
        raise UsageError("sigma must be non-negative")
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-center_spread, center_spread, size=(n_clusters, d))
    counts = np.full(n_clusters, n // n_clusters)
    counts[: n % n_clusters] += 1
    labels = np.repeat(np.arange(n_clusters), counts)
    points = centers[labels] + rng.normal(0.0, 1.0, size=(n, d)) * sigma
    return LabeledDataset(points, labels)
