"""Dynamic DBSCAN: hash buckets plus a spanning forest over the core points.

A point is *core* when, under at least one of the ``t`` hash functions, its
bucket holds ``k`` or more points.  Inside every bucket the core points are
chained into a path ordered by insertion index; the union of these paths
(minus the edges that would close a cycle) is kept as a forest whose trees
are the clusters.  Non-core points hang off a single colliding core point as
leaves, or stay isolated and are reported as noise.

Behavioural quirk kept on purpose: an isolated non-core point is *not*
re-attached when a core point later appears in one of its buckets.  It is
only re-examined when its own status changes or its anchor core is demoted
or deleted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import InputError, InvariantError, UsageError
from .forest import make_forest
from .lsh import HashFunction, LSHIndex, draw_hash_functions

PointId = int


@dataclass(frozen=True)
class Config:
    k: int = 10
    t: int = 10
    epsilon: float = 0.75
    seed: int = 0

    def __post_init__(self) -> None:
        if int(self.k) != self.k or self.k < 1:
            raise UsageError(f"k must be a positive integer, got {self.k}")
        if int(self.t) != self.t or self.t < 1:
            raise UsageError(f"t must be a positive integer, got {self.t}")
        if not (self.epsilon > 0 and np.isfinite(self.epsilon)):
            raise UsageError(f"epsilon must be positive, got {self.epsilon}")


@dataclass
class Snapshot:
    """Dense cluster labels for every live point, plus the noise set.

    Labels are numbered 0..m-1 in order of each cluster's smallest member.
    Noise points still get their own (singleton) label.
    """

    labels: dict[PointId, int] = field(default_factory=dict)
    noise: set[PointId] = field(default_factory=set)

    @property
    def n_clusters(self) -> int:
        return len(set(self.labels.values())) - len(self.noise)


class DynamicDBSCAN:
    """Fully dynamic DBSCAN structure.

    >>> db = DynamicDBSCAN(k=2, t=1, epsilon=0.5, seed=0)
    >>> a = db.add_point([0.1]); b = db.add_point([0.2])
    >>> db.get_cluster(a) == db.get_cluster(b)
    True
    """

    def __init__(
        self,
        k: int = 10,
        t: int = 10,
        epsilon: float = 0.75,
        seed: int = 0,
        *,
        hash_functions: Sequence[HashFunction] | None = None,
        backend: str | None = None,
    ) -> None:
        self.config = Config(k, t, epsilon, seed)
        if hash_functions is None:
            rng = np.random.default_rng(seed)
            hash_functions = draw_hash_functions(t, epsilon, rng)
        elif len(hash_functions) != t or any(f.epsilon != epsilon for f in hash_functions):
            raise UsageError("hash_functions must hold t functions sharing epsilon")
        self._index = LSHIndex(hash_functions)
        # point ids are the forest's node handles: both are allocated in lockstep
        self._forest = make_forest(seed, backend)
        self._coords: dict[PointId, np.ndarray] = {}

    @classmethod
    def from_config(cls, cfg: Config, **kwargs) -> "DynamicDBSCAN":
        return cls(cfg.k, cfg.t, cfg.epsilon, cfg.seed, **kwargs)

    # -------------------------------------------------------------- queries

    @property
    def k(self) -> int:
        return self.config.k

    @property
    def t(self) -> int:
        return self.config.t

    @property
    def hash_functions(self) -> list[HashFunction]:
        return list(self._index.functions)

    @property
    def index(self) -> LSHIndex:
        return self._index

    @property
    def forest(self):
        return self._forest

    @property
    def d(self) -> int | None:
        return self._index.d

    def __len__(self) -> int:
        return len(self._coords)

    def __contains__(self, pid: object) -> bool:
        return pid in self._forest

    def ids(self) -> list[PointId]:
        return list(self._coords)

    def points(self) -> Iterator[tuple[PointId, np.ndarray]]:
        """(id, coords) pairs in insertion order."""
        return iter(self._coords.items())

    def coords(self, pid: PointId) -> np.ndarray:
        self._require(pid)
        return self._coords[pid]

    def is_core(self, pid: PointId) -> bool:
        self._require(pid)
        return self._index.is_core(pid)

    def core_points(self) -> list[PointId]:
        return [p for p in self._coords if self._index.is_core(p)]

    def degree(self, pid: PointId) -> int:
        return self._forest.degree(self._require(pid))

    def forest_neighbors(self, pid: PointId) -> set[PointId]:
        return self._forest.neighbors(self._require(pid))

    def is_noise(self, pid: PointId) -> bool:
        self._require(pid)
        return not self._index.is_core(pid) and self._forest.degree(pid) == 0

    def get_cluster(self, pid: PointId) -> PointId:
        """Identifier of pid's cluster: the id of its tree's representative."""
        try:
            return self._forest.root(pid)
        except UsageError:
            raise UsageError(f"unknown point id {pid!r}") from None

    def labels_snapshot(self) -> Snapshot:
        snap = Snapshot()
        dense: dict[int, int] = {}
        root, degree, is_core = self._forest.root, self._forest.degree, self._index.is_core
        for pid in self._coords:
            r = root(pid)
            label = dense.get(r)
            if label is None:
                label = dense[r] = len(dense)
            snap.labels[pid] = label
            if not is_core(pid) and degree(pid) == 0:
                snap.noise.add(pid)
        return snap

    def _require(self, pid) -> PointId:
        if pid not in self._forest:
            raise UsageError(f"unknown point id {pid!r}")
        return pid

    # -------------------------------------------------------------- updates

    def add_point(self, x) -> PointId:
        arr = np.array(x, dtype=np.float64)
        if arr.ndim != 1:
            raise InputError(f"expected a coordinate vector, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InputError("coordinates must be finite")
        keys = self._index.keys_for(arr)  # validates before anything is allocated
        pid = self._forest.add()
        sizes = self._index.insert_point(pid, arr, keys=keys)
        self._coords[pid] = arr

        k = self.config.k
        index = self._index
        promoted: set[PointId] = set()
        for i, (_, size) in enumerate(sizes):
            if size > k:
                # the bucket already met the threshold, so only pid is new
                promoted.add(pid)
            elif size == k:
                promoted.update(m for m in index.bucket(i, pid).members if not index.is_core(m))
        if promoted:
            for c in sorted(promoted, key=index.idx):
                self._link_core_point(c)
        else:
            self._link_non_core_point(pid)
        return pid

    def delete_point(self, pid: PointId) -> None:
        self._require(pid)
        index, forest = self._index, self._forest
        if index.is_core(pid):
            self._unlink_core_point(pid)
        else:
            for nb in forest.neighbors(pid):
                forest.cut(pid, nb)

        k = self.config.k
        candidates: set[PointId] = set()
        for i, (key, size) in enumerate(index.remove_point(pid)):
            if size == k - 1 and size > 0:
                b = index.lookup(i, key)
                candidates.update(m for m in b.members if index.is_core(m))
        demoted = [y for y in candidates if index.max_bucket_size(y) < k]
        for c in sorted(demoted, key=index.idx):
            self._unlink_core_point(c)
            self._link_non_core_point(c)

        forest.remove(pid)
        del self._coords[pid]

    # -------------------------------------------------------------- internals

    def _link_core_point(self, c: PointId) -> None:
        index, forest = self._index, self._forest
        for nb in forest.neighbors(c):
            forest.cut(c, nb)
            if not index.is_core(nb):
                self._link_non_core_point(nb)
        index.set_core_flag(c, True)
        for i in range(index.t):
            c1, c2 = index.core_neighbors(i, c)
            if c1 is not None and c2 is not None:
                forest.cut(c1, c2)
            if c1 is not None:
                forest.link(c1, c)
            if c2 is not None:
                forest.link(c, c2)

    def _unlink_core_point(self, c: PointId) -> None:
        index, forest = self._index, self._forest
        core_nbrs = [n for n in forest.neighbors(c) if index.is_core(n)]
        for i in range(index.t):
            c1, c2 = index.core_neighbors(i, c)
            if c1 is not None:
                forest.cut(c1, c)
            if c2 is not None:
                forest.cut(c, c2)
            if c1 is not None and c2 is not None:
                forest.link(c1, c2)
        index.set_core_flag(c, False)
        # what remains are non-core leaves hanging off c
        for nb in forest.neighbors(c):
            forest.cut(c, nb)
            if index.is_core(nb):
                raise InvariantError(f"core {c} kept a non-path edge to core {nb}")
            self._link_non_core_point(nb)
        if len(core_nbrs) > 1:
            self._reconnect(core_nbrs)

    def _reconnect(self, nodes: list[PointId]) -> None:
        """Re-join trees that lost their only forest path through a removed core.

        Bridging each bucket's predecessor and successor is not enough: two
        cores consecutive in a third bucket may have relied on the removed
        vertex because their own edge was skipped to avoid a cycle.  Scan the
        core points of every piece except the largest and link each to its
        bucket neighbours when they sit in different trees.
        """
        forest, index = self._forest, self._index

        def pieces() -> dict[int, int]:
            out: dict[int, int] = {}
            for n in nodes:
                out.setdefault(forest.root(n), n)
            return out

        groups = pieces()
        if len(groups) < 2:
            return
        reps = sorted(groups.values(), key=forest.tree_size)
        for rep in reps[:-1]:
            for u in forest.tour(rep):
                if not index.is_core(u):
                    continue
                linked = False
                for i in range(index.t):
                    for v in index.core_neighbors(i, u):
                        if v is not None and forest.link(u, v):
                            linked = True
                if linked and len(pieces()) < 2:
                    return

    def _link_non_core_point(self, p: PointId) -> None:
        hit = self._index.any_core_in_buckets(p)
        if hit is not None:
            self._forest.link(p, hit[1])

    # -------------------------------------------------------------- checking

    def validate(self) -> None:
        """Re-derive the structural invariants from scratch; raise InvariantError on drift.

        Cost is linear in the structure size, so call it from tests or debug
        runs only.
        """
        index, forest, k = self._index, self._forest, self.config.k
        if len(forest) != len(self._coords) or len(index) != len(self._coords):
            raise InvariantError("point, forest and index sizes disagree")
        if forest.edge_count != len(forest) - forest.tree_count():
            raise InvariantError("forest contains a cycle")
        for pid in self._coords:
            core = index.is_core(pid)
            if core != (index.max_bucket_size(pid) >= k):
                raise InvariantError(f"core flag of {pid} disagrees with bucket sizes")
            deg = forest.degree(pid)
            if not core and deg > 1:
                raise InvariantError(f"non-core point {pid} has degree {deg}")
            for q in forest.neighbors(pid):
                if not core and not index.is_core(q):
                    raise InvariantError(f"edge between non-core points {pid} and {q}")
                if core and index.is_core(q):
                    shared = any(
                        index.bucket(i, pid) is index.bucket(i, q) for i in range(index.t)
                    )
                    if not shared:
                        raise InvariantError(f"core edge {pid}-{q} without a shared bucket")
        for i in range(index.t):
            for b in index.buckets(i):
                expected = sorted(index.idx(m) for m in b.members if index.is_core(m))
                if list(b.core) != expected:
                    raise InvariantError(f"core order of bucket {b.key} out of sync")
