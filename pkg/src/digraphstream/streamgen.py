"""Instance generators and the metered multi-pass edge stream.

Every generator is a pure function of its parameters and an integer seed.
Randomness comes from numpy's counter-based Philox bit generator, so a seed
reproduces the same instance on any platform.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .exceptions import PassBudgetExceeded, StreamError
from .graphcore import Digraph, Ordering, Tournament, pair_arrays

__all__ = [
    "SpaceMeter",
    "EdgeStream",
    "PlantedInstance",
    "ORDER_POLICIES",
    "make_rng",
    "random_ordering",
    "gen_tou",
    "gen_dyes",
    "gen_dno",
    "gen_random_tournament",
    "gen_plantdag",
    "stream_of",
    "write_edgelist",
    "read_edgelist",
]

ORDER_POLICIES = ("as-given", "per-pass-random-shuffle", "fixed-random-shuffle")


def make_rng(seed) -> np.random.Generator:
    """Philox-backed generator; ``seed`` may be an int, a sequence of ints or None."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


@dataclass
class SpaceMeter:
    """Item counts an algorithm keeps in working memory.

    One stored edge is one item and one sketch coordinate is one word.
    ``stored_items_peak`` is the peak of the combined total over time.
    """

    stored_edges: int = 0
    stored_edges_peak: int = 0
    sketch_words: int = 0
    aux_words: int = 0
    aux_words_peak: int = 0
    stored_items_peak: int = 0
    passes_used: int = 0

    def begin_pass(self):
        self.passes_used += 1

    def set_stored(self, count: int):
        self.stored_edges = int(count)
        self.stored_edges_peak = max(self.stored_edges_peak, self.stored_edges)
        self._touch()

    def add_stored(self, k: int = 1):
        self.set_stored(self.stored_edges + k)

    def release_stored(self, k: int | None = None):
        self.set_stored(0 if k is None else self.stored_edges - k)

    def set_sketch_words(self, words: int):
        self.sketch_words = int(words)
        self._touch()

    def set_aux(self, words: int):
        self.aux_words = int(words)
        self.aux_words_peak = max(self.aux_words_peak, self.aux_words)
        self._touch()

    def record_peak(self, stored: int, aux: int = 0):
        """Report a transient peak measured inside a vectorized block."""
        self.stored_edges_peak = max(self.stored_edges_peak, int(stored))
        self.aux_words_peak = max(self.aux_words_peak, int(aux))
        self.stored_items_peak = max(self.stored_items_peak,
                                     int(stored) + int(aux) + self.sketch_words)

    def _touch(self):
        self.stored_items_peak = max(
            self.stored_items_peak,
            self.stored_edges + self.sketch_words + self.aux_words)

    @property
    def bits_estimate(self) -> int:
        """Rough bit count: 64 bits per item. Reported, never enforced."""
        return 64 * self.stored_items_peak

    def snapshot(self) -> dict:
        return {
            "passes_used": self.passes_used,
            "stored_edges_peak": self.stored_edges_peak,
            "sketch_words": self.sketch_words,
            "aux_words_peak": self.aux_words_peak,
            "stored_items_peak": self.stored_items_peak,
        }


class EdgeStream:
    """Replayable, metered sequence of directed edges.

    Protocol: ``begin_pass()``, then ``next_edge()`` (or ``next_batch(k)``)
    until it returns None (an empty batch). Each pass emits every edge
    exactly once. ``passes()`` wraps this as a generator of batches.

    Order policies: ``as-given`` replays the input order;
    ``fixed-random-shuffle`` draws one uniform permutation at construction
    and replays it; ``per-pass-random-shuffle`` draws a fresh one per pass.
    """

    def __init__(self, edges, n: int, policy: str = "as-given", pass_budget: int = 1,
                 seed=None, meter: SpaceMeter | None = None):
        if policy not in ORDER_POLICIES:
            raise ValueError(f"unknown order policy {policy!r}; choose from {ORDER_POLICIES}")
        if pass_budget < 1:
            raise ValueError("pass_budget must be at least 1")
        e = np.ascontiguousarray(np.asarray(edges).reshape(-1, 2))
        if not np.issubdtype(e.dtype, np.integer):
            e = e.astype(np.int64)
        e.setflags(write=False)
        self._edges = e
        self.n = int(n)
        self.policy = policy
        self.pass_budget = int(pass_budget)
        self.meter = meter if meter is not None else SpaceMeter()
        self._rng = make_rng(seed)
        self._perm = None
        if policy == "fixed-random-shuffle":
            self._perm = self._rng.permutation(self.m)
        self._cursor = None
        self._passes = 0

    @property
    def m(self) -> int:
        return int(self._edges.shape[0])

    @property
    def passes_used(self) -> int:
        return self._passes

    @property
    def in_pass(self) -> bool:
        return self._cursor is not None

    @property
    def position(self) -> int:
        """Number of edges already emitted in the current pass."""
        self._require_pass()
        return self._cursor

    @property
    def remaining(self) -> int:
        self._require_pass()
        return self.m - self._cursor

    def begin_pass(self):
        if self._passes >= self.pass_budget:
            raise PassBudgetExceeded(
                f"pass budget of {self.pass_budget} exhausted")
        self._passes += 1
        self.meter.begin_pass()
        if self.policy == "per-pass-random-shuffle":
            self._perm = self._rng.permutation(self.m)
        self._cursor = 0

    def _require_pass(self):
        if self._cursor is None:
            raise StreamError("next_edge() called before begin_pass()")

    def next_edge(self) -> tuple[int, int] | None:
        self._require_pass()
        if self._cursor >= self.m:
            return None
        i = self._cursor
        self._cursor += 1
        j = i if self._perm is None else self._perm[i]
        return int(self._edges[j, 0]), int(self._edges[j, 1])

    def next_batch(self, k: int) -> np.ndarray:
        """Up to ``k`` further edges of the current pass as an ``(r, 2)`` array."""
        self._require_pass()
        lo = self._cursor
        hi = min(self.m, lo + int(k))
        self._cursor = hi
        if self._perm is None:
            return self._edges[lo:hi]
        return self._edges[self._perm[lo:hi]]

    def passes(self, batch: int = 1 << 16) -> Iterator[np.ndarray]:
        """Run one full pass, yielding edge batches."""
        self.begin_pass()
        while True:
            chunk = self.next_batch(batch)
            if chunk.shape[0] == 0:
                break
            yield chunk

    def __iter__(self):
        """One pass, one ``(tail, head)`` tuple at a time."""
        self.begin_pass()
        while True:
            e = self.next_edge()
            if e is None:
                return
            yield e

    def __repr__(self):
        return (f"EdgeStream(n={self.n}, m={self.m}, policy={self.policy!r}, "
                f"passes={self._passes}/{self.pass_budget})")


@dataclass(frozen=True)
class PlantedInstance:
    """Draw from PlantDAG: a DAG containing the Hamiltonian path of ``hidden_order``."""

    graph: Digraph
    hidden_order: Ordering
    q: float

    @property
    def n(self) -> int:
        return self.graph.n


def random_ordering(n: int, seed) -> Ordering:
    return Ordering(make_rng(seed).permutation(n))


def gen_tou(pi: Ordering) -> Tournament:
    """The acyclic tournament consistent with ``pi``: ``u -> v`` iff ``pi(u) < pi(v)``."""
    us, vs = pair_arrays(pi.n)
    pos = pi.position
    return Tournament(pi.n, pos[us] < pos[vs])


def gen_dyes(n: int, seed) -> Tournament:
    """Tou(pi) for a uniform pi; the same pi is ``random_ordering(n, seed)``."""
    return gen_tou(random_ordering(n, seed))


def gen_dno(n: int, seed) -> Tournament:
    """Each pair oriented by an independent fair coin."""
    N = n * (n - 1) // 2
    return Tournament(n, make_rng(seed).random(N) < 0.5)


gen_random_tournament = gen_dno


def gen_plantdag(n: int, q: float, seed) -> PlantedInstance:
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    if n < 2:
        raise ValueError("PlantDAG needs n >= 2")
    rng = make_rng(seed)
    pi = Ordering(rng.permutation(n))
    # work in rank space: pair (i, j), i < j, means order[i] -> order[j]
    ri, rj = pair_arrays(n)
    keep = rng.random(ri.shape[0]) < q
    keep |= (rj - ri) == 1
    order = pi.order
    edges = np.stack([order[ri[keep]], order[rj[keep]]], axis=1)
    return PlantedInstance(Digraph(n, edges), pi, float(q))


def stream_of(g, policy: str = "as-given", pass_budget: int = 1, seed=None,
              meter: SpaceMeter | None = None) -> EdgeStream:
    """Wrap a Tournament, Digraph or PlantedInstance as an EdgeStream."""
    if isinstance(g, PlantedInstance):
        g = g.graph
    return EdgeStream(g.edges(), g.n, policy=policy, pass_budget=pass_budget,
                      seed=seed, meter=meter)


def write_edgelist(dest, n: int, edges, order: Ordering | None = None):
    """Write ``n m`` then one ``tail head`` line per edge (LF, 0-indexed).

    ``order`` appends the ground-truth line ``# order v0 v1 ...``.
    """
    e = np.asarray(edges).reshape(-1, 2)
    buf = io.StringIO()
    buf.write(f"{n} {e.shape[0]}\n")
    if e.shape[0]:
        np.savetxt(buf, e, fmt="%d", delimiter=" ", newline="\n")
    if order is not None:
        buf.write("# order " + " ".join(map(str, order.tolist())) + "\n")
    _write_text(dest, buf.getvalue())


def read_edgelist(src) -> tuple[int, np.ndarray, Ordering | None]:
    text = _read_text(src)
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty edge-list file")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError("edge-list header must be 'n m'")
    n, m = int(header[0]), int(header[1])
    body = []
    order = None
    for line in lines[1:]:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            tokens = line[1:].split()
            if tokens and tokens[0] == "order":
                order = Ordering([int(x) for x in tokens[1:]])
            continue
        body.append(line)
    if len(body) != m:
        raise ValueError(f"header promises {m} edges, file has {len(body)}")
    if m:
        edges = np.loadtxt(io.StringIO("\n".join(body)), dtype=np.int64, ndmin=2)
    else:
        edges = np.zeros((0, 2), dtype=np.int64)
    if edges.shape[1] != 2:
        raise ValueError("each edge line must be 'tail head'")
    if m and (edges.min() < 0 or edges.max() >= n):
        raise ValueError(f"edge endpoint outside [0, {n})")
    return n, edges, order


def _write_text(dest, text: str):
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", newline="\n") as fh:
            fh.write(text)
    else:
        dest.write(text)


def _read_text(src) -> str:
    if isinstance(src, (str, os.PathLike)):
        with open(src) as fh:
            return fh.read()
    return src.read()
