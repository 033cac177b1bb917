"""Combinatorial core: orderings, tournaments, digraphs and exact primitives.

Vertices are the dense integers ``0 .. n-1``. Unordered pairs ``{u, v}``
with ``u < v`` are laid out densely by :func:`pair_index`, which is the
coordinate system shared by tournaments and the linear sketches.
"""

from __future__ import annotations

import math
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .exceptions import CapExceeded

__all__ = [
    "Ordering",
    "Tournament",
    "Digraph",
    "pair_index",
    "pair_arrays",
    "back_edges",
    "count_back_edges",
    "kendall_distance",
    "is_acyclic_tournament",
    "exact_min_fas",
    "mediocrity_fraction",
]


def pair_index(u, v, n):
    """Dense index of the pair ``{u, v}`` (``u < v``) among ``C(n, 2)`` pairs.

    Works elementwise on integer arrays.
    """
    return u * n - u * (u + 1) // 2 + (v - u - 1)


_PAIR_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def pair_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(us, vs)`` listing all pairs ``u < v`` in pair-index order."""
    if n not in _PAIR_CACHE:
        us, vs = np.triu_indices(n, 1)
        dtype = np.int32 if n < 2**15 else np.int64
        us, vs = us.astype(dtype), vs.astype(dtype)
        us.setflags(write=False)
        vs.setflags(write=False)
        if len(_PAIR_CACHE) >= 8:
            _PAIR_CACHE.clear()
        _PAIR_CACHE[n] = (us, vs)
    return _PAIR_CACHE[n]


class Ordering:
    """A permutation of ``0 .. n-1``.

    ``order[r]`` is the vertex at rank ``r`` and ``position[v]`` the rank of
    vertex ``v``. Equality and hashing use the rank array.
    """

    __slots__ = ("_order", "_position")

    def __init__(self, order: Iterable[int]):
        arr = np.array(list(order) if not isinstance(order, np.ndarray) else order,
                       dtype=np.int64)
        if arr.ndim != 1:
            raise ValueError("an ordering must be one-dimensional")
        n = arr.shape[0]
        position = np.full(n, -1, dtype=np.int64)
        if n and (arr.min() < 0 or arr.max() >= n):
            raise ValueError(f"ordering entries must lie in [0, {n})")
        position[arr] = np.arange(n)
        if n and (position < 0).any():
            raise ValueError("ordering contains a repeated vertex")
        arr.setflags(write=False)
        position.setflags(write=False)
        self._order = arr
        self._position = position

    @classmethod
    def from_positions(cls, position: Sequence[int]) -> "Ordering":
        pos = np.asarray(position, dtype=np.int64)
        order = np.empty_like(pos)
        order[pos] = np.arange(pos.shape[0])
        return cls(order)

    @classmethod
    def identity(cls, n: int) -> "Ordering":
        return cls(np.arange(n))

    @property
    def order(self) -> np.ndarray:
        return self._order

    @property
    def position(self) -> np.ndarray:
        return self._position

    @property
    def n(self) -> int:
        return int(self._order.shape[0])

    def reverse(self) -> "Ordering":
        return Ordering(self._order[::-1])

    def tolist(self) -> list[int]:
        return self._order.tolist()

    def __len__(self):
        return self.n

    def __iter__(self):
        return iter(self._order.tolist())

    def __getitem__(self, rank):
        return int(self._order[rank])

    def __eq__(self, other):
        if not isinstance(other, Ordering):
            return NotImplemented
        return np.array_equal(self._position, other._position)

    def __hash__(self):
        return hash(self._position.tobytes())

    def __repr__(self):
        return f"Ordering({self.tolist()})"

    def __str__(self):
        return " ".join(map(str, self.tolist()))


class Tournament:
    """Orientation of every pair of ``n`` vertices.

    ``orient[pair_index(u, v)]`` is True when the edge is ``u -> v`` for
    ``u < v`` and False when it is ``v -> u``.
    """

    def __init__(self, n: int, orient):
        orient = np.asarray(orient, dtype=bool)
        if orient.shape != (n * (n - 1) // 2,):
            raise ValueError(
                f"tournament on {n} vertices needs {n * (n - 1) // 2} orientation bits")
        orient.setflags(write=False)
        self.n = int(n)
        self.orient = orient

    @classmethod
    def from_edges(cls, n: int, edges) -> "Tournament":
        """Build from an iterable of directed edges, one per unordered pair."""
        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                       dtype=np.int64).reshape(-1, 2)
        N = n * (n - 1) // 2
        if e.shape[0] != N:
            raise ValueError(f"expected {N} edges for a tournament on {n} vertices, got {e.shape[0]}")
        if (e[:, 0] == e[:, 1]).any():
            raise ValueError("self-loop in tournament edge list")
        lo = np.minimum(e[:, 0], e[:, 1])
        hi = np.maximum(e[:, 0], e[:, 1])
        idx = pair_index(lo, hi, n)
        seen = np.zeros(N, dtype=bool)
        seen[idx] = True
        if not seen.all():
            raise ValueError("edge list repeats a pair, so it is not a tournament")
        orient = np.zeros(N, dtype=bool)
        orient[idx] = e[:, 0] < e[:, 1]
        return cls(n, orient)

    @classmethod
    def from_adjacency(cls, adj) -> "Tournament":
        adj = np.asarray(adj, dtype=bool)
        n = adj.shape[0]
        us, vs = pair_arrays(n)
        if not np.array_equal(adj[us, vs], ~adj[vs, us]) or adj.diagonal().any():
            raise ValueError("matrix is not a tournament adjacency matrix")
        return cls(n, adj[us, vs])

    @property
    def m(self) -> int:
        return self.orient.shape[0]

    def edges(self) -> np.ndarray:
        """All edges as an ``(m, 2)`` array ``[tail, head]`` in pair-index order."""
        us, vs = pair_arrays(self.n)
        tails = np.where(self.orient, us, vs)
        heads = np.where(self.orient, vs, us)
        return np.stack([tails, heads], axis=1)

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        if u < v:
            return bool(self.orient[pair_index(u, v, self.n)])
        return not bool(self.orient[pair_index(v, u, self.n)])

    @cached_property
    def adjacency(self) -> np.ndarray:
        us, vs = pair_arrays(self.n)
        adj = np.zeros((self.n, self.n), dtype=bool)
        adj[us, vs] = self.orient
        adj[vs, us] = ~self.orient
        adj.setflags(write=False)
        return adj

    def in_degrees(self) -> np.ndarray:
        us, vs = pair_arrays(self.n)
        heads = np.where(self.orient, vs, us)
        return np.bincount(heads, minlength=self.n)

    def out_degrees(self) -> np.ndarray:
        return (self.n - 1) - self.in_degrees()

    def __eq__(self, other):
        if not isinstance(other, Tournament):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.orient, other.orient)

    def __hash__(self):
        return hash((self.n, self.orient.tobytes()))

    def __repr__(self):
        return f"Tournament(n={self.n})"


class Digraph:
    """Simple directed graph: no self-loops, no repeated edges."""

    def __init__(self, n: int, edges):
        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                       dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ValueError(f"edge endpoint outside [0, {n})")
        if (e[:, 0] == e[:, 1]).any():
            raise ValueError("digraph may not contain self-loops")
        if e.shape[0] != np.unique(e[:, 0] * n + e[:, 1]).shape[0]:
            raise ValueError("digraph may not contain repeated edges")
        e.setflags(write=False)
        self.n = int(n)
        self._edges = e

    def edges(self) -> np.ndarray:
        return self._edges

    @property
    def m(self) -> int:
        return int(self._edges.shape[0])

    def in_degrees(self) -> np.ndarray:
        return np.bincount(self._edges[:, 1], minlength=self.n)

    def out_degrees(self) -> np.ndarray:
        return np.bincount(self._edges[:, 0], minlength=self.n)

    @cached_property
    def successors(self) -> list[list[int]]:
        out = [[] for _ in range(self.n)]
        for u, v in self._edges.tolist():
            out[u].append(v)
        return out

    def edge_set(self) -> set[tuple[int, int]]:
        return set(map(tuple, self._edges.tolist()))

    def __repr__(self):
        return f"Digraph(n={self.n}, m={self.m})"


def _edges_of(g) -> np.ndarray:
    if isinstance(g, (Tournament, Digraph)):
        return g.edges()
    raise TypeError(f"expected a Tournament or Digraph, got {type(g).__name__}")


def _check_same_n(g, sigma: Ordering):
    if sigma.n != g.n:
        raise ValueError(f"ordering has {sigma.n} vertices but the graph has {g.n}")


def count_back_edges(g, sigma: Ordering) -> int:
    """``|B_G(sigma)|`` without materializing the edge set."""
    _check_same_n(g, sigma)
    if isinstance(g, Tournament):
        us, vs = pair_arrays(g.n)
        pos = sigma.position
        # low->high edge is backward iff v precedes u
        forward = pos[us] < pos[vs]
        return int(np.count_nonzero(forward != g.orient))
    e = _edges_of(g)
    pos = sigma.position
    return int(np.count_nonzero(pos[e[:, 1]] < pos[e[:, 0]]))


def back_edges(g, sigma: Ordering) -> tuple[int, set[tuple[int, int]]]:
    """Edges whose head precedes their tail under ``sigma``, with their count."""
    _check_same_n(g, sigma)
    e = _edges_of(g)
    pos = sigma.position
    bad = e[pos[e[:, 1]] < pos[e[:, 0]]]
    return int(bad.shape[0]), set(map(tuple, bad.tolist()))


def kendall_distance(pi: Ordering, sigma: Ordering) -> int:
    """Number of pairs ranked differently by ``pi`` and ``sigma``."""
    if pi.n != sigma.n:
        raise ValueError(f"orderings have different sizes ({pi.n} vs {sigma.n})")
    seq = sigma.position[pi.order]
    return _count_inversions(seq)


def _count_inversions(seq: np.ndarray) -> int:
    n = seq.shape[0]
    if n < 2:
        return 0
    if n <= 2048:
        us, vs = pair_arrays(n)
        return int(np.count_nonzero(seq[us] > seq[vs]))
    # Fenwick tree over values
    tree = [0] * (n + 1)
    inv = 0
    for i, x in enumerate(seq.tolist()):
        # count earlier entries greater than x
        j, le = x + 1, 0
        while j > 0:
            le += tree[j]
            j -= j & -j
        inv += i - le
        j = x + 1
        while j <= n:
            tree[j] += 1
            j += j & -j
    return inv


def is_acyclic_tournament(t: Tournament) -> bool:
    """A tournament is acyclic iff its in-degree multiset is ``{0, ..., n-1}``."""
    return bool(np.array_equal(np.sort(t.in_degrees()), np.arange(t.n)))


def mediocrity_fraction(t: Tournament, eps: float) -> float:
    """Fraction of vertices with in-degree strictly inside ``(eps n, (1-eps) n)``."""
    d = t.in_degrees()
    n = t.n
    return float(np.count_nonzero((d > eps * n) & (d < (1 - eps) * n))) / n


def exact_min_fas(t: Tournament, cap: int = 20) -> tuple[int, Ordering]:
    """Minimum number of back edges over all orderings, by subset DP.

    ``f(S) = min_v f(S - v) + |{u in S - v : v -> u}|`` with ``v`` placed last
    in ``S``. Runs in ``O(2^n n)`` vectorized steps; ties go to the smallest
    ``v`` at each subset.
    """
    n = t.n
    if n > cap:
        raise CapExceeded(f"exact_min_fas is capped at n={cap}, got n={n}")
    if n <= 1:
        return 0, Ordering.identity(n)
    adj = t.adjacency
    size = 1 << n
    out_mask = np.array(
        [int(sum(1 << u for u in range(n) if adj[v, u])) for v in range(n)],
        dtype=np.int64)
    popcount = _popcount_table(n)
    f = np.zeros(size, dtype=np.int64)
    last = np.zeros(size, dtype=np.int8)
    order_by_layer = np.argsort(popcount, kind="stable")
    bounds = np.searchsorted(popcount[order_by_layer], np.arange(n + 2))
    for k in range(1, n + 1):
        S = order_by_layer[bounds[k]:bounds[k + 1]]
        best = np.full(S.shape[0], np.iinfo(np.int64).max, dtype=np.int64)
        arg = np.zeros(S.shape[0], dtype=np.int8)
        for v in range(n):
            has = ((S >> v) & 1).astype(bool)
            Sv = S[has]
            cost = f[Sv ^ (1 << v)] + popcount[Sv & out_mask[v]]
            sub = best[has]
            better = cost < sub
            sub[better] = cost[better]
            best[has] = sub
            a = arg[has]
            a[better] = v
            arg[has] = a
        f[S] = best
        last[S] = arg
    seq = []
    S = size - 1
    while S:
        v = int(last[S])
        seq.append(v)
        S ^= 1 << v
    seq.reverse()
    return int(f[size - 1]), Ordering(seq)


def _popcount_table(n: int) -> np.ndarray:
    table = np.zeros(1 << n, dtype=np.int64)
    for b in range(n):
        table[1 << b:1 << (b + 1)] = table[:1 << b] + 1
    return table


def n_pairs(n: int) -> int:
    return math.comb(n, 2)
