"""Pure-Python Euler tour forest.

Each tree is stored as its Euler tour: one occurrence per vertex plus one
occurrence per directed edge.  The tour is kept in an implicit treap (keyed by
position) so that rerooting, splicing and splitting cost expected O(log n).

The compiled twin in ``_forest_ext.pyx`` follows this file line for line:
same slot allocation, same priority stream, same tie-breaks.  Given equal seeds
the two backends return identical roots.
"""

from __future__ import annotations

from typing import Iterator

from .errors import UsageError

_MASK = 0xFFFFFFFFFFFFFFFF
_NIL = -1


class SplitMix64:
    """64-bit splitmix generator; the priority source of both backends."""

    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = seed & _MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)


class EulerTourForest:
    """Forest of undirected trees with conditional link and cut.

    Node handles are integers handed out by :meth:`add` and never reused.
    ``link`` only joins different trees and ``cut`` only removes existing
    edges; both report whether they changed anything.
    """

    backend = "python"

    def __init__(self, seed: int = 0) -> None:
        self._rng = SplitMix64(seed)
        # treap slots
        self._left: list[int] = []
        self._right: list[int] = []
        self._parent: list[int] = []
        self._prio: list[int] = []
        self._size: list[int] = []
        self._vcnt: list[int] = []
        self._owner: list[int] = []  # node handle for vertex slots, -1 for edge slots
        self._first: list[int] = []  # owner of the leftmost vertex slot below, -1 if none
        self._free: list[int] = []
        # graph bookkeeping, indexed by node handle (-1 / None once removed)
        self._slot: list[int] = []
        self._adj: list[set[int] | None] = []
        self._edges: dict[tuple[int, int], tuple[int, int]] = {}
        self._live = 0

    # ------------------------------------------------------------------ slots

    def _new_slot(self, owner: int) -> int:
        prio = self._rng.next()
        vc = 1 if owner >= 0 else 0
        if self._free:
            s = self._free.pop()
            self._left[s] = _NIL
            self._right[s] = _NIL
            self._parent[s] = _NIL
            self._prio[s] = prio
            self._size[s] = 1
            self._vcnt[s] = vc
            self._owner[s] = owner
            self._first[s] = owner
            return s
        s = len(self._left)
        self._left.append(_NIL)
        self._right.append(_NIL)
        self._parent.append(_NIL)
        self._prio.append(prio)
        self._size.append(1)
        self._vcnt.append(vc)
        self._owner.append(owner)
        self._first.append(owner)
        return s

    def _free_slot(self, s: int) -> None:
        self._owner[s] = _NIL
        self._free.append(s)

    # ------------------------------------------------------------------ treap

    def _pull(self, x: int) -> None:
        left, right = self._left[x], self._right[x]
        size = 1
        first = self._owner[x]
        vc = 1 if first >= 0 else 0
        if right != _NIL:
            size += self._size[right]
            vc += self._vcnt[right]
            if first == _NIL:
                first = self._first[right]
        if left != _NIL:
            size += self._size[left]
            vc += self._vcnt[left]
            if self._first[left] != _NIL:
                first = self._first[left]
        self._size[x] = size
        self._vcnt[x] = vc
        self._first[x] = first

    def _merge(self, a: int, b: int) -> int:
        if a == _NIL:
            return b
        if b == _NIL:
            return a
        if self._prio[a] > self._prio[b]:
            r = self._merge(self._right[a], b)
            self._right[a] = r
            self._parent[r] = a
            self._pull(a)
            return a
        l = self._merge(a, self._left[b])
        self._left[b] = l
        self._parent[l] = b
        self._pull(b)
        return b

    def _split(self, t: int, k: int) -> tuple[int, int]:
        """Split treap ``t`` into its first ``k`` occurrences and the rest."""
        if t == _NIL:
            return _NIL, _NIL
        left = self._left[t]
        lsize = self._size[left] if left != _NIL else 0
        if k <= lsize:
            a, b = self._split(left, k)
            self._left[t] = b
            if b != _NIL:
                self._parent[b] = t
            self._pull(t)
            if a != _NIL:
                self._parent[a] = _NIL
            self._parent[t] = _NIL
            return a, t
        a, b = self._split(self._right[t], k - lsize - 1)
        self._right[t] = a
        if a != _NIL:
            self._parent[a] = t
        self._pull(t)
        if b != _NIL:
            self._parent[b] = _NIL
        self._parent[t] = _NIL
        return t, b

    def _rank(self, x: int) -> tuple[int, int]:
        """Return (position of slot x in its tour, treap root)."""
        left = self._left[x]
        r = self._size[left] if left != _NIL else 0
        parent = self._parent
        p = parent[x]
        while p != _NIL:
            if self._right[p] == x:
                pl = self._left[p]
                r += (self._size[pl] if pl != _NIL else 0) + 1
            x = p
            p = parent[x]
        return r, x

    def _tree_root(self, x: int) -> int:
        parent = self._parent
        p = parent[x]
        while p != _NIL:
            x = p
            p = parent[x]
        return x

    def _reroot(self, s: int) -> int:
        """Rotate the tour containing slot ``s`` so that ``s`` comes first."""
        r, root = self._rank(s)
        if r == 0:
            return root
        a, b = self._split(root, r)
        root = self._merge(b, a)
        self._parent[root] = _NIL
        return root

    # ------------------------------------------------------------------ api

    def _check(self, u: int) -> int:
        if isinstance(u, int) and 0 <= u < len(self._slot):
            s = self._slot[u]
            if s != _NIL:
                return s
        raise UsageError(f"unknown or removed node {u!r}")

    def add(self) -> int:
        u = len(self._slot)
        self._slot.append(self._new_slot(u))
        self._adj.append(set())
        self._live += 1
        return u

    def remove(self, u: int) -> None:
        s = self._check(u)
        if self._adj[u]:
            raise UsageError(f"node {u} still has {len(self._adj[u])} incident edges")
        self._slot[u] = _NIL
        self._adj[u] = None
        self._live -= 1
        self._free_slot(s)

    def connected(self, u: int, v: int) -> bool:
        return self._tree_root(self._check(u)) == self._tree_root(self._check(v))

    def link(self, u: int, v: int) -> bool:
        su, sv = self._check(u), self._check(v)
        if u == v:
            raise UsageError("cannot link a node to itself")
        if self._tree_root(su) == self._tree_root(sv):
            return False
        ru = self._reroot(su)
        rv = self._reroot(sv)
        e_uv = self._new_slot(_NIL)
        e_vu = self._new_slot(_NIL)
        root = self._merge(self._merge(self._merge(ru, e_uv), rv), e_vu)
        self._parent[root] = _NIL
        key = (u, v) if u < v else (v, u)
        self._edges[key] = (e_uv, e_vu) if u < v else (e_vu, e_uv)
        self._adj[u].add(v)
        self._adj[v].add(u)
        return True

    def cut(self, u: int, v: int) -> bool:
        self._check(u)
        self._check(v)
        key = (u, v) if u < v else (v, u)
        occ = self._edges.pop(key, None)
        if occ is None:
            return False
        e1, e2 = occ
        r1, root = self._rank(e1)
        r2, _ = self._rank(e2)
        if r1 > r2:
            r1, r2 = r2, r1
        # tour = A e B e' C  ->  B is one tree, A+C the other
        a, rest = self._split(root, r1)
        first, rest = self._split(rest, 1)
        b, rest = self._split(rest, r2 - r1 - 1)
        second, c = self._split(rest, 1)
        root = self._merge(a, c)
        if root != _NIL:
            self._parent[root] = _NIL
        self._free_slot(first)
        self._free_slot(second)
        self._adj[u].discard(v)
        self._adj[v].discard(u)
        return True

    def root(self, u: int) -> int:
        return self._first[self._tree_root(self._check(u))]

    def neighbors(self, u: int) -> set[int]:
        self._check(u)
        return set(self._adj[u])

    def degree(self, u: int) -> int:
        self._check(u)
        return len(self._adj[u])

    def tour(self, u: int) -> list[int]:
        """Vertex occurrences of u's tree in tour order (debugging aid)."""
        out: list[int] = []
        stack: list[int] = []
        x = self._tree_root(self._check(u))
        while stack or x != _NIL:
            while x != _NIL:
                stack.append(x)
                x = self._left[x]
            x = stack.pop()
            if self._owner[x] >= 0:
                out.append(self._owner[x])
            x = self._right[x]
        return out

    def tree_size(self, u: int) -> int:
        return self._vcnt[self._tree_root(self._check(u))]

    def __contains__(self, u: object) -> bool:
        return isinstance(u, int) and 0 <= u < len(self._slot) and self._slot[u] != _NIL

    def __len__(self) -> int:
        return self._live

    def __iter__(self) -> Iterator[int]:
        return iter([u for u, s in enumerate(self._slot) if s != _NIL])

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def edges(self) -> list[tuple[int, int]]:
        return list(self._edges)

    def tree_count(self) -> int:
        return len({self._tree_root(s) for s in self._slot if s != _NIL})

    @property
    def slot_count(self) -> int:
        """Live treap slots (vertices + 2 per edge)."""
        return len(self._left) - len(self._free)
