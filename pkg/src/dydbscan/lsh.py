"""Grid locality-sensitive hashing with per-bucket core ordering.

A hash function shifts every coordinate by the same random offset and
quantises onto a grid of side ``2 * epsilon``::

    h(x)[j] = floor((x[j] + eta) / (2 * epsilon)),   eta ~ U[0, 2 * epsilon)

Two points with equal keys are within ``2 * epsilon`` in the max-norm, and
points closer than ``2 * epsilon`` in the L1 norm collide with probability at
least ``1 - ||x - y||_1 / (2 * epsilon)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np
from sortedcontainers import SortedList

from .errors import InputError, UsageError

HashKey = tuple[int, ...]

# |key component| must stay below this to fit comfortably in int64
_KEY_LIMIT = float(2**62)


@dataclass(frozen=True)
class HashFunction:
    epsilon: float
    eta: float
    function_index: int = 0

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise UsageError(f"epsilon must be positive, got {self.epsilon}")
        if not 0 <= self.eta < 2 * self.epsilon:
            raise UsageError(f"eta must lie in [0, 2*epsilon), got {self.eta}")

    def keys(self, points: np.ndarray) -> np.ndarray:
        """Grid keys of an (n, d) array, as an (n, d) int64 array."""
        return quantize(np.asarray(points, dtype=np.float64), self.eta, self.epsilon)


def draw_hash_functions(t: int, epsilon: float, rng: np.random.Generator) -> list[HashFunction]:
    """Draw ``t`` independent offsets uniformly from [0, 2*epsilon)."""
    etas = rng.uniform(0.0, 2.0 * epsilon, size=t)
    return [HashFunction(float(epsilon), float(eta), i) for i, eta in enumerate(etas)]


def quantize(points: np.ndarray, eta, epsilon: float) -> np.ndarray:
    """floor((x + eta) / (2 epsilon)) with overflow and finiteness checks.

    ``eta`` may be a scalar or an array broadcastable against ``points``.
    """
    scaled = np.floor((points + eta) / (2.0 * epsilon))
    if not np.all(np.isfinite(scaled)):
        raise InputError("coordinates must be finite")
    if np.any(np.abs(scaled) >= _KEY_LIMIT):
        raise InputError("coordinate magnitude too large for 64-bit grid keys")
    return scaled.astype(np.int64)


def compute_key(f: HashFunction, x: Sequence[float], d: int | None = None) -> HashKey:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or (d is not None and arr.shape[0] != d):
        raise UsageError(f"expected a vector of dimension {d}, got shape {arr.shape}")
    return tuple(f.keys(arr[None, :])[0].tolist())


class Bucket:
    """Members sharing one key, plus the insertion indices of the core members."""

    __slots__ = ("key", "members", "core")

    def __init__(self, key: HashKey) -> None:
        self.key = key
        self.members: set = set()
        self.core = SortedList()

    def __len__(self) -> int:
        return len(self.members)

    def __repr__(self) -> str:
        return f"Bucket(key={self.key}, size={len(self.members)}, cores={len(self.core)})"


class _Entry:
    __slots__ = ("idx", "buckets", "is_core")

    def __init__(self, idx: int, buckets: list[Bucket]) -> None:
        self.idx = idx
        self.buckets = buckets
        self.is_core = False


class LSHIndex:
    """Bucket tables for ``t`` hash functions over a dynamic point set.

    Every stored id receives a fresh insertion index; within a bucket the core
    members are ordered by that index so predecessor/successor queries run in
    logarithmic time.
    """

    def __init__(self, functions: Sequence[HashFunction], d: int | None = None) -> None:
        if not functions:
            raise UsageError("need at least one hash function")
        eps = {f.epsilon for f in functions}
        if len(eps) != 1:
            raise UsageError("all hash functions must share one epsilon")
        self.functions = list(functions)
        self.epsilon = functions[0].epsilon
        self.d = d
        self._etas = np.array([f.eta for f in functions])[:, None]
        self._tables: list[dict[HashKey, Bucket]] = [{} for _ in functions]
        self._entries: dict[Hashable, _Entry] = {}
        self._id_of_idx: dict[int, Hashable] = {}
        self._next_idx = 0

    @property
    def t(self) -> int:
        return len(self.functions)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, pid: object) -> bool:
        return pid in self._entries

    def _entry(self, pid) -> _Entry:
        try:
            return self._entries[pid]
        except (KeyError, TypeError):
            raise UsageError(f"unknown point id {pid!r}") from None

    def keys_for(self, x) -> list[HashKey]:
        """Keys of one point under every function (validates dimension)."""
        arr = np.asarray(x, dtype=np.float64)
        if arr.ndim != 1:
            raise InputError(f"expected a coordinate vector, got shape {arr.shape}")
        if self.d is None:
            self.d = arr.shape[0]
        elif arr.shape[0] != self.d:
            raise InputError(f"expected dimension {self.d}, got {arr.shape[0]}")
        return [tuple(row) for row in quantize(arr[None, :], self._etas, self.epsilon).tolist()]

    def insert_point(self, pid: Hashable, x, keys: list[HashKey] | None = None) -> list[tuple[HashKey, int]]:
        if pid in self._entries:
            raise UsageError(f"point id {pid!r} already present")
        if keys is None:
            keys = self.keys_for(x)
        buckets = []
        out = []
        for table, key in zip(self._tables, keys):
            b = table.get(key)
            if b is None:
                b = table[key] = Bucket(key)
            b.members.add(pid)
            buckets.append(b)
            out.append((key, len(b.members)))
        idx = self._next_idx
        self._next_idx += 1
        self._entries[pid] = _Entry(idx, buckets)
        self._id_of_idx[idx] = pid
        return out

    def remove_point(self, pid: Hashable) -> list[tuple[HashKey, int]]:
        e = self._entry(pid)
        out = []
        for table, b in zip(self._tables, e.buckets):
            b.members.discard(pid)
            if e.is_core:
                b.core.discard(e.idx)
            if not b.members:
                del table[b.key]
            out.append((b.key, len(b.members)))
        del self._entries[pid]
        del self._id_of_idx[e.idx]
        return out

    def idx(self, pid) -> int:
        return self._entry(pid).idx

    def is_core(self, pid) -> bool:
        return self._entry(pid).is_core

    def set_core_flag(self, pid, is_core: bool) -> None:
        e = self._entry(pid)
        if e.is_core == is_core:
            return
        e.is_core = is_core
        if is_core:
            for b in e.buckets:
                b.core.add(e.idx)
        else:
            for b in e.buckets:
                b.core.discard(e.idx)

    def core_neighbors(self, function_index: int, pid):
        """Core points adjacent to ``pid`` in insertion order within one bucket."""
        e = self._entry(pid)
        core = e.buckets[function_index].core
        lo = core.bisect_left(e.idx)
        hi = core.bisect_right(e.idx)
        pred = self._id_of_idx[core[lo - 1]] if lo > 0 else None
        succ = self._id_of_idx[core[hi]] if hi < len(core) else None
        return pred, succ

    def any_core_in_buckets(self, pid):
        """First (function index, smallest-idx core) over pid's buckets, or None."""
        for i, b in enumerate(self._entry(pid).buckets):
            if b.core:
                return i, self._id_of_idx[b.core[0]]
        return None

    def bucket_sizes(self, pid) -> list[int]:
        return [len(b.members) for b in self._entry(pid).buckets]

    def max_bucket_size(self, pid) -> int:
        return max(len(b.members) for b in self._entry(pid).buckets)

    def bucket(self, function_index: int, pid) -> Bucket:
        return self._entry(pid).buckets[function_index]

    def lookup(self, function_index: int, key: HashKey) -> Bucket | None:
        return self._tables[function_index].get(tuple(key))

    def buckets(self, function_index: int) -> Iterable[Bucket]:
        return self._tables[function_index].values()

    def bucket_count(self) -> int:
        return sum(len(t) for t in self._tables)

    def ids(self) -> list:
        return list(self._entries)
