"""Static reference clusterings.

* :func:`naive_dbscan` -- textbook DBSCAN by all-pairs distances, O(n^2).
* :func:`static_hash_clustering` -- recompute the hash-bucket clustering from
  scratch; used per batch as the "recompute everything" baseline and as the
  oracle for the dynamic structure when handed the same hash functions.
* :class:`FixedCoreModel` -- cluster an initial batch, freeze its core points
  and route every later point to the first frozen core it collides with.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import InputError, UsageError
from .lsh import HashFunction, quantize

NOISE = -1


@dataclass
class StaticClustering:
    """Partition of the input ids.

    ``labels`` are dense integers ordered by each cluster's first member in
    input order; noise points keep a singleton label and are listed in
    ``noise``.
    """

    labels: dict[Hashable, int] = field(default_factory=dict)
    noise: set = field(default_factory=set)
    cores: set = field(default_factory=set)

    def clusters(self, include_noise: bool = False) -> list[set]:
        groups: dict[int, set] = {}
        for pid, lab in self.labels.items():
            if include_noise or pid not in self.noise:
                groups.setdefault(lab, set()).add(pid)
        return list(groups.values())

    def core_partition(self) -> set[frozenset]:
        groups: dict[int, set] = {}
        for pid in self.cores:
            groups.setdefault(self.labels[pid], set()).add(pid)
        return {frozenset(g) for g in groups.values()}


def _dense_labels(component: np.ndarray) -> np.ndarray:
    """Renumber component ids by first appearance."""
    _, first, inverse = np.unique(component, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    return order[inverse]


def _as_matrix(points, d: int | None = None) -> np.ndarray:
    X = np.asarray(points, dtype=np.float64)
    if X.size == 0:
        return X.reshape(0, d or 0)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or (d is not None and X.shape[1] != d):
        raise InputError(f"expected an (n, {d or 'd'}) array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InputError("coordinates must be finite")
    return X


def naive_dbscan(points, k: int, epsilon: float) -> StaticClustering:
    """DBSCAN by brute force over Euclidean distances.

    A point is core when at least ``k`` points (itself included) lie within
    ``epsilon``.  Every core point is joined to every point within
    ``epsilon``; connected components of that graph are the clusters.  Non-core
    points are ordinary vertices here, so a border point adjacent to cores of
    two groups merges them.  Ids are row positions.
    """
    if k < 1 or not epsilon > 0:
        raise UsageError("need k >= 1 and epsilon > 0")
    X = _as_matrix(points)
    n = len(X)
    if n == 0:
        return StaticClustering()
    eps2 = epsilon * epsilon
    rows, cols = [], []
    counts = np.zeros(n, dtype=np.int64)
    block = max(1, 4_000_000 // max(n, 1))
    for start in range(0, n, block):
        chunk = X[start:start + block]
        d2 = ((chunk[:, None, :] - X[None, :, :]) ** 2).sum(axis=2)
        close = d2 <= eps2
        counts[start:start + len(chunk)] = close.sum(axis=1)
        r, c = np.nonzero(close)
        rows.append(r + start)
        cols.append(c)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    core = counts >= k
    keep = core[rows] & (rows != cols)
    rows, cols = rows[keep], cols[keep]
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    _, comp = connected_components(graph, directed=False)
    labels = _dense_labels(comp)
    near_core = core.copy()
    near_core[cols] = True
    return StaticClustering(
        labels={i: int(labels[i]) for i in range(n)},
        noise={i for i in range(n) if not near_core[i]},
        cores={i for i in range(n) if core[i]},
    )


def _bucket_ids(keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-row bucket id and the size of each bucket."""
    _, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    return inverse.reshape(-1), counts


def static_hash_clustering(
    points,
    k: int,
    hash_states: Sequence[HashFunction],
    ids: Sequence[Hashable] | None = None,
) -> StaticClustering:
    """Cluster a fixed point set through hash-bucket collisions.

    ``points`` is an (n, d) array in insertion order (row order doubles as the
    tie-break order); ``ids`` names the rows and defaults to 0..n-1.  A point is
    core when any of its buckets holds at least ``k`` points; core points
    colliding under any function share a cluster.  A non-core point joins the
    smallest-index core of the first function in which it meets one, else it
    is noise.
    """
    if not hash_states:
        raise UsageError("need at least one hash function")
    X = _as_matrix(points)
    n = len(X)
    ids = list(range(n)) if ids is None else list(ids)
    if len(ids) != n:
        raise UsageError("ids and points differ in length")
    if n == 0:
        return StaticClustering()

    bucket_of = []
    core = np.zeros(n, dtype=bool)
    for f in hash_states:
        b, counts = _bucket_ids(quantize(X, f.eta, f.epsilon))
        bucket_of.append(b)
        core |= counts[b] >= k

    # chain the core points of every bucket; union over functions
    core_rows = np.flatnonzero(core)
    src, dst = [], []
    for b in bucket_of:
        cb = b[core_rows]
        order = np.argsort(cb, kind="stable")
        sorted_b = cb[order]
        same = sorted_b[1:] == sorted_b[:-1]
        src.append(core_rows[order[1:][same]])
        dst.append(core_rows[order[:-1][same]])
    src = np.concatenate(src) if src else np.empty(0, dtype=np.int64)
    dst = np.concatenate(dst) if dst else np.empty(0, dtype=np.int64)
    graph = coo_matrix((np.ones(len(src)), (src, dst)), shape=(n, n))
    _, comp = connected_components(graph, directed=False)

    # attach non-core points: first function with a core in the bucket, lowest row
    anchor = np.full(n, -1, dtype=np.int64)
    for b in bucket_of:
        first_core = np.full(b.max() + 1, n, dtype=np.int64)
        np.minimum.at(first_core, b[core_rows], core_rows)
        cand = first_core[b]
        take = (~core) & (anchor < 0) & (cand < n)
        anchor[take] = cand[take]
    group = comp.copy()
    attached = anchor >= 0
    group[attached] = comp[anchor[attached]]
    labels = _dense_labels(group)
    noise = (~core) & (~attached)
    return StaticClustering(
        labels={ids[i]: int(labels[i]) for i in range(n)},
        noise={ids[i] for i in np.flatnonzero(noise)},
        cores={ids[i] for i in core_rows},
    )


class FixedCoreModel:
    """Clustering with a core set frozen after the first batch.

    Later points are never promoted; each is routed to the cluster of the
    first frozen core it collides with (function order, then insertion order)
    or reported as :data:`NOISE`.
    """

    def __init__(self, points, k: int, hash_states: Sequence[HashFunction], ids=None) -> None:
        X = _as_matrix(points)
        self.hash_states = list(hash_states)
        self.initial = static_hash_clustering(X, k, self.hash_states, ids)
        ids = list(range(len(X))) if ids is None else list(ids)
        self.d = X.shape[1] if len(X) else None
        row_of = {pid: i for i, pid in enumerate(ids)}
        self._tables: list[dict[tuple, int]] = []
        core_rows = sorted(row_of[c] for c in self.initial.cores)
        for f in self.hash_states:
            table: dict[tuple, int] = {}
            if core_rows:
                keys = f.keys(X[core_rows])
                for row, key in zip(core_rows, map(tuple, keys.tolist())):
                    table.setdefault(key, self.initial.labels[ids[row]])
            self._tables.append(table)

    @property
    def n_clusters(self) -> int:
        return len({self.initial.labels[c] for c in self.initial.cores})

    def assign(self, x) -> int:
        arr = np.asarray(x, dtype=np.float64).reshape(1, -1)
        if self.d is not None and arr.shape[1] != self.d:
            raise InputError(f"expected dimension {self.d}, got {arr.shape[1]}")
        for f, table in zip(self.hash_states, self._tables):
            key = tuple(f.keys(arr)[0].tolist())
            label = table.get(key)
            if label is not None:
                return label
        return NOISE


def fixed_core_assign(frozen: FixedCoreModel, x) -> int:
    return frozen.assign(x)
