# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Euler tour forest.

Mirror of ``_forest_py.EulerTourForest``: identical slot allocation, priority
stream and tie-breaks, with the treap held in one C array of node structs.
"""

from libc.stdlib cimport realloc, free
from libc.stdint cimport int32_t, int64_t, uint64_t

from .errors import UsageError

cdef enum:
    NIL = -1


cdef inline uint64_t splitmix_next(uint64_t* state) noexcept nogil:
    cdef uint64_t z
    state[0] = state[0] + <uint64_t>0x9E3779B97F4A7C15
    z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


ctypedef struct Node:
    int64_t left
    int64_t right
    int64_t size
    int64_t vcnt
    int64_t owner   # node handle for vertex slots, NIL for edge slots
    int64_t first   # owner of the leftmost vertex slot in this subtree, NIL if none
    uint64_t prio


cdef class EulerTourForest:
    """Forest of undirected trees with conditional link and cut (C treap)."""

    cdef Node* t
    # parents live apart from the nodes: root queries walk only this array,
    # and 4-byte entries keep it cache resident at 10^5 points
    cdef int32_t* par
    cdef int64_t* freelist
    cdef int64_t n_slots
    cdef int64_t n_free
    cdef int64_t capacity
    cdef uint64_t rng_state
    # node handle -> vertex slot (-1 once removed)
    cdef int32_t* node_slot
    cdef int64_t node_cap
    cdef int64_t _next_id
    cdef int64_t _live
    cdef list _adj
    cdef dict _edges

    backend = "ext"

    def __cinit__(self, seed=0):
        self.capacity = 0
        self.n_slots = 0
        self.n_free = 0
        self.t = NULL
        self.par = NULL
        self.freelist = NULL
        self.node_slot = NULL
        self.node_cap = 0
        self._grow(64)
        self._grow_nodes(64)

    def __init__(self, seed=0):
        self.rng_state = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
        self._adj = []
        self._edges = {}
        self._next_id = 0
        self._live = 0

    def __dealloc__(self):
        free(self.t)
        free(self.par)
        free(self.freelist)
        free(self.node_slot)

    cdef void _grow_nodes(self, int64_t cap) except *:
        cdef int32_t* p = <int32_t*>realloc(self.node_slot, <size_t>cap * sizeof(int32_t))
        if p == NULL:
            raise MemoryError()
        self.node_slot = p
        self.node_cap = cap

    cdef void _grow(self, int64_t cap) except *:
        cdef Node* t = <Node*>realloc(self.t, <size_t>cap * sizeof(Node))
        if t == NULL:
            raise MemoryError()
        self.t = t
        if cap > 0x7FFFFFFF:
            raise MemoryError("treap slot count exceeds 32-bit parent indices")
        cdef int32_t* par = <int32_t*>realloc(self.par, <size_t>cap * sizeof(int32_t))
        if par == NULL:
            raise MemoryError()
        self.par = par
        cdef int64_t* f = <int64_t*>realloc(self.freelist, <size_t>cap * sizeof(int64_t))
        if f == NULL:
            raise MemoryError()
        self.freelist = f
        self.capacity = cap

    # ------------------------------------------------------------ slots

    cdef int64_t _new_slot(self, int64_t owner) except -2:
        cdef uint64_t p = splitmix_next(&self.rng_state)
        cdef int64_t s
        if self.n_free > 0:
            self.n_free -= 1
            s = self.freelist[self.n_free]
        else:
            if self.n_slots == self.capacity:
                self._grow(self.capacity * 2)
            s = self.n_slots
            self.n_slots += 1
        cdef Node* n = &self.t[s]
        n.left = NIL
        n.right = NIL
        self.par[s] = NIL
        n.prio = p
        n.size = 1
        n.vcnt = 1 if owner >= 0 else 0
        n.owner = owner
        n.first = owner
        return s

    cdef inline void _free_slot(self, int64_t s) noexcept:
        self.t[s].owner = NIL
        self.freelist[self.n_free] = s
        self.n_free += 1

    # ------------------------------------------------------------ treap

    cdef inline void _pull(self, int64_t x) noexcept nogil:
        cdef Node* t = self.t
        cdef Node* n = &t[x]
        cdef int64_t l = n.left
        cdef int64_t r = n.right
        cdef int64_t sz = 1
        cdef int64_t vc = 1 if n.owner >= 0 else 0
        cdef int64_t first = n.owner
        if r != NIL:
            sz += t[r].size
            vc += t[r].vcnt
            if first == NIL:
                first = t[r].first
        if l != NIL:
            sz += t[l].size
            vc += t[l].vcnt
            if t[l].first != NIL:
                first = t[l].first
        n.size = sz
        n.vcnt = vc
        n.first = first

    cdef int64_t _merge(self, int64_t a, int64_t b) noexcept nogil:
        cdef Node* t = self.t
        cdef int64_t r
        if a == NIL:
            return b
        if b == NIL:
            return a
        if t[a].prio > t[b].prio:
            r = self._merge(t[a].right, b)
            t[a].right = r
            self.par[r] = <int32_t>a
            self._pull(a)
            return a
        r = self._merge(a, t[b].left)
        t[b].left = r
        self.par[r] = <int32_t>b
        self._pull(b)
        return b

    cdef void _split(self, int64_t x, int64_t k, int64_t* out_a, int64_t* out_b) noexcept nogil:
        cdef Node* t = self.t
        cdef int64_t l, lsize, a, b
        if x == NIL:
            out_a[0] = NIL
            out_b[0] = NIL
            return
        l = t[x].left
        lsize = t[l].size if l != NIL else 0
        if k <= lsize:
            self._split(l, k, &a, &b)
            t[x].left = b
            if b != NIL:
                self.par[b] = <int32_t>x
            self._pull(x)
            if a != NIL:
                self.par[a] = <int32_t>NIL
            self.par[x] = <int32_t>NIL
            out_a[0] = a
            out_b[0] = x
            return
        self._split(t[x].right, k - lsize - 1, &a, &b)
        t[x].right = a
        if a != NIL:
            self.par[a] = <int32_t>x
        self._pull(x)
        if b != NIL:
            self.par[b] = <int32_t>NIL
        self.par[x] = <int32_t>NIL
        out_a[0] = x
        out_b[0] = b

    cdef int64_t _rank(self, int64_t x, int64_t* root) noexcept nogil:
        cdef Node* t = self.t
        cdef int32_t* par = self.par
        cdef int64_t l = t[x].left
        cdef int64_t r = t[l].size if l != NIL else 0
        cdef int64_t p = par[x]
        cdef int64_t pl
        while p != NIL:
            if t[p].right == x:
                pl = t[p].left
                r += (t[pl].size if pl != NIL else 0) + 1
            x = p
            p = par[x]
        root[0] = x
        return r

    cdef inline int64_t _tree_root(self, int64_t x) noexcept nogil:
        cdef int32_t* par = self.par
        cdef int64_t p = par[x]
        while p != NIL:
            x = p
            p = par[x]
        return x

    cdef int64_t _reroot(self, int64_t s) noexcept nogil:
        cdef int64_t root, a, b
        cdef int64_t r = self._rank(s, &root)
        if r == 0:
            return root
        self._split(root, r, &a, &b)
        root = self._merge(b, a)
        self.par[root] = <int32_t>NIL
        return root

    # ------------------------------------------------------------ api

    cdef int64_t _check(self, object u) except -2:
        cdef int64_t i
        if isinstance(u, int) and 0 <= u < self._next_id:
            i = u
            if self.node_slot[i] != NIL:
                return self.node_slot[i]
        raise UsageError(f"unknown or removed node {u!r}")

    def add(self):
        cdef int64_t u = self._next_id
        if u == self.node_cap:
            self._grow_nodes(self.node_cap * 2)
        self.node_slot[u] = <int32_t>self._new_slot(u)
        self._next_id += 1
        self._live += 1
        self._adj.append(set())
        return u

    def remove(self, u):
        cdef int64_t s = self._check(u)
        if self._adj[u]:
            raise UsageError(f"node {u} still has {len(self._adj[u])} incident edges")
        self.node_slot[<int64_t>u] = NIL
        self._adj[u] = None
        self._live -= 1
        self._free_slot(s)

    def connected(self, u, v):
        return self._tree_root(self._check(u)) == self._tree_root(self._check(v))

    def link(self, u, v):
        cdef int64_t su = self._check(u)
        cdef int64_t sv = self._check(v)
        cdef int64_t ru, rv, e_uv, e_vu, root
        if u == v:
            raise UsageError("cannot link a node to itself")
        if self._tree_root(su) == self._tree_root(sv):
            return False
        ru = self._reroot(su)
        rv = self._reroot(sv)
        e_uv = self._new_slot(NIL)
        e_vu = self._new_slot(NIL)
        root = self._merge(self._merge(self._merge(ru, e_uv), rv), e_vu)
        self.par[root] = <int32_t>NIL
        if u < v:
            self._edges[(u, v)] = (e_uv, e_vu)
        else:
            self._edges[(v, u)] = (e_vu, e_uv)
        (<set>self._adj[u]).add(v)
        (<set>self._adj[v]).add(u)
        return True

    def cut(self, u, v):
        self._check(u)
        self._check(v)
        key = (u, v) if u < v else (v, u)
        occ = self._edges.pop(key, None)
        if occ is None:
            return False
        cdef int64_t e1 = occ[0]
        cdef int64_t e2 = occ[1]
        cdef int64_t root, dummy, r1, r2, tmp, a, rest, first, b, second, c
        r1 = self._rank(e1, &root)
        r2 = self._rank(e2, &dummy)
        if r1 > r2:
            tmp = r1
            r1 = r2
            r2 = tmp
        self._split(root, r1, &a, &rest)
        self._split(rest, 1, &first, &rest)
        self._split(rest, r2 - r1 - 1, &b, &rest)
        self._split(rest, 1, &second, &c)
        root = self._merge(a, c)
        if root != NIL:
            self.par[root] = <int32_t>NIL
        self._free_slot(first)
        self._free_slot(second)
        (<set>self._adj[u]).discard(v)
        (<set>self._adj[v]).discard(u)
        return True

    def root(self, u):
        return self.t[self._tree_root(self._check(u))].first

    def neighbors(self, u):
        self._check(u)
        return set(self._adj[u])

    def degree(self, u):
        self._check(u)
        return len(self._adj[u])

    def tour(self, u):
        """Vertex occurrences of u's tree in tour order (debugging aid)."""
        cdef list out = []
        cdef list stack = []
        cdef int64_t x = self._tree_root(self._check(u))
        while stack or x != NIL:
            while x != NIL:
                stack.append(x)
                x = self.t[x].left
            x = stack.pop()
            if self.t[x].owner >= 0:
                out.append(self.t[x].owner)
            x = self.t[x].right
        return out

    def tree_size(self, u):
        return self.t[self._tree_root(self._check(u))].vcnt

    def __contains__(self, u):
        cdef int64_t i
        if not (isinstance(u, int) and 0 <= u < self._next_id):
            return False
        i = u
        return self.node_slot[i] != NIL

    def __len__(self):
        return self._live

    def __iter__(self):
        cdef int64_t i
        return iter([i for i in range(self._next_id) if self.node_slot[i] != NIL])

    @property
    def edge_count(self):
        return len(self._edges)

    def edges(self):
        return list(self._edges)

    def tree_count(self):
        cdef set roots = set()
        cdef int64_t i
        for i in range(self._next_id):
            if self.node_slot[i] != NIL:
                roots.add(self._tree_root(self.node_slot[i]))
        return len(roots)

    @property
    def slot_count(self):
        return self.n_slots - self.n_free
