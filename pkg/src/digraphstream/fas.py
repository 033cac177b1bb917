"""Feedback arc set in tournaments.

Three streaming algorithms and one oracle:

* :func:`fas_one_pass_sketch` keeps an l1 sketch of the orientation vector
  and brute-forces all ``n!`` orderings against it afterwards.
* :func:`fas_kwiksort_stream` emulates KwikSort in ``p`` passes, applying a
  growing group of random pivots per pass.
* :func:`fas_degree_order` sorts by in-degree (one pass, ``n`` counters).
* :func:`eps_oracle` answers back-edge queries within ``1 +- eps`` while
  revealing as little as possible.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .base import StreamEstimator
from .exceptions import CapExceeded, PromiseViolation
from .graphcore import Ordering, Tournament, count_back_edges, pair_arrays, pair_index
from .l1sketch import DEFAULT_C_SKETCH, L1Sketch
from .streamgen import EdgeStream, make_rng
from .validation import check_fraction, check_positive_int, check_seed, check_stream

__all__ = [
    "FasResult",
    "fas_one_pass_sketch",
    "fas_kwiksort_stream",
    "fas_degree_order",
    "eps_oracle",
    "kwiksort_group_sizes",
    "SketchFAS",
    "KwikSortFAS",
    "DegreeOrderFAS",
]


@dataclass
class FasResult:
    ordering: Ordering
    estimated_cost: float | None = None
    exact_cost: int | None = None
    meter: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def with_exact(self, g) -> "FasResult":
        """Fill ``exact_cost`` from the full graph."""
        self.exact_cost = count_back_edges(g, self.ordering)
        return self

    def as_attributes(self) -> dict:
        return {
            "ordering_": self.ordering,
            "estimated_cost_": self.estimated_cost,
            "meter_": self.meter,
            "diagnostics_": self.diagnostics,
        }


def _tournament_vector_pass(stream: EdgeStream, on_batch, batch: int = 1 << 16):
    """Run one pass, validating that the edges form a tournament on ``stream.n``.

    ``on_batch(tails, heads, idx)`` receives pair indices for each batch. The
    ``C(n, 2)``-bit seen-table is validation state and is metered as aux.
    """
    n = stream.n
    N = n * (n - 1) // 2
    seen = np.zeros(N, dtype=bool)
    stream.meter.set_aux(math.ceil(N / 64))
    for chunk in stream.passes(batch):
        t = chunk[:, 0].astype(np.int64)
        h = chunk[:, 1].astype(np.int64)
        if (t == h).any() or t.min() < 0 or h.min() < 0 or t.max() >= n or h.max() >= n:
            raise PromiseViolation("stream edge is a self-loop or leaves the vertex range")
        idx = pair_index(np.minimum(t, h), np.maximum(t, h), n)
        if seen[idx].any() or np.unique(idx).shape[0] != idx.shape[0]:
            raise PromiseViolation("stream repeats a vertex pair; not a tournament")
        seen[idx] = True
        on_batch(t, h, idx)
    if not seen.all():
        raise PromiseViolation(
            f"stream covers {int(seen.sum())} of {N} pairs; not a tournament")


def _permutation_blocks(n: int, block: int = 5040):
    """All orderings of ``range(n)`` in lexicographic order, as ``(B, n)`` blocks."""
    it = itertools.permutations(range(n))
    while True:
        rows = list(itertools.islice(it, block))
        if not rows:
            return
        yield np.array(rows, dtype=np.int64)


def _forward_indicator(orders: np.ndarray) -> np.ndarray:
    """``y[b, idx(u, v)] = 1{pi_b(u) < pi_b(v)}`` for a block of orders."""
    B, n = orders.shape
    pos = np.empty_like(orders)
    pos[np.arange(B)[:, None], orders] = np.arange(n)[None, :]
    us, vs = pair_arrays(n)
    return (pos[:, us] < pos[:, vs]).astype(np.float64)


def sketch_minimizer(sketch: L1Sketch, n: int, scale: float = 1.0,
                     block: int = 5040) -> tuple[Ordering, float]:
    """Ordering minimizing the sketched ``||x - scale * y^pi||_1`` over all ``n!``.

    Ties go to the lexicographically smallest ordering. Estimates are
    nonnegative, so the scan stops at the first estimate of exactly zero.
    """
    best_val = math.inf
    best_order = None
    for orders in _permutation_blocks(n, block):
        Y = _forward_indicator(orders)
        if scale != 1.0:
            Y *= scale
        est = sketch.estimate_diff_many(Y)
        i = int(np.argmin(est))
        if est[i] < best_val:
            best_val = float(est[i])
            best_order = orders[i]
            if best_val == 0.0:
                break
    return Ordering(best_order), best_val


def fas_one_pass_sketch(stream: EdgeStream, eps: float, seed: int = 0,
                        enum_cap: int = 10, c_sketch: float = DEFAULT_C_SKETCH) -> FasResult:
    """One pass, sketch of ``x_uv = 1{u -> v}``, then exhaustive post-processing.

    The sketch runs at accuracy ``eps / 3`` and failure probability
    ``1 / (3 n!)``, so with probability 2/3 every candidate's estimate is
    accurate at once and the minimizer is a ``(1 + eps)``-approximation.
    """
    eps = check_fraction(eps, "eps")
    n = stream.n
    if n > enum_cap:
        raise CapExceeded(f"n={n} exceeds enum_cap={enum_cap} (n! post-processing)")
    if n < 2:
        stream.begin_pass()
        return FasResult(Ordering.identity(n), 0.0, meter=stream.meter.snapshot())
    N = n * (n - 1) // 2
    log_inv_delta = math.log(3.0) + math.lgamma(n + 1)
    sketch = L1Sketch(N, eps / 3.0, math.exp(-log_inv_delta), seed=check_seed(seed),
                      c_sketch=c_sketch, log_inv_delta=log_inv_delta)
    stream.meter.set_sketch_words(sketch.d)

    def ingest(t, h, idx):
        for j in idx[t < h].tolist():
            sketch.update(j, 1)

    _tournament_vector_pass(stream, ingest)
    pi, est = sketch_minimizer(sketch, n)
    return FasResult(pi, est, meter=stream.meter.snapshot(),
                     diagnostics={"sketch_rows": sketch.d, "candidates": math.factorial(n)})


def kwiksort_group_sizes(n: int, p: int, c: float) -> list[int]:
    """``|V_j| = min(remaining, ceil(c n^{j/p} log2 n))``; the last group takes the rest."""
    log_n = max(1.0, math.log2(n)) if n > 1 else 1.0
    sizes, used = [], 0
    for j in range(1, p + 1):
        if j == p:
            size = n - used
        else:
            size = min(n - used, math.ceil(c * n ** (j / p) * log_n))
        sizes.append(size)
        used += size
    return sizes


class _Blocks:
    """Ordered partition of the vertices into sub-problems (a linked list)."""

    def __init__(self, n: int):
        self.members = {0: list(range(n))} if n else {}
        self.nxt = {0: None} if n else {}
        self.prv = {0: None} if n else {}
        self.head = 0 if n else None
        self.where = np.zeros(n, dtype=np.int64)
        self._next_id = 1

    def _new(self, verts) -> int:
        b = self._next_id
        self._next_id += 1
        self.members[b] = verts
        for u in verts:
            self.where[u] = b
        return b

    def split(self, b: int, before: list, pivot: int, after: list):
        """Replace block ``b`` by ``before, {pivot}, after`` in place."""
        prev, nxt = self.prv.pop(b), self.nxt.pop(b)
        del self.members[b]
        chain = [self._new(part) for part in (before, [pivot], after) if part]
        for x, y in zip([prev] + chain, chain + [nxt]):
            if x is None:
                self.head = y
            else:
                self.nxt[x] = y
            if y is not None:
                self.prv[y] = x

    def __iter__(self):
        b = self.head
        while b is not None:
            yield self.members[b]
            b = self.nxt[b]

    def max_size(self) -> int:
        return max((len(v) for v in self.members.values()), default=0)


def fas_kwiksort_stream(stream: EdgeStream, p: int, c: float = 4.0, seed: int = 0,
                        batch: int = 1 << 16) -> FasResult:
    """KwikSort in ``p`` passes; 3-approximation in expectation.

    Pass ``j`` stores every edge between a pivot of group ``V_j`` and a
    vertex in the same sub-problem (as of the end of pass ``j - 1``). After
    the pass the group's pivots are applied in sequence order; a pivot whose
    sub-problem is already a singleton is consumed without effect.
    ``{u : u -> pivot}`` goes before the pivot and ``{w : pivot -> w}`` after.
    """
    p = check_positive_int(p, "p")
    if stream.pass_budget - stream.passes_used < p:
        raise PromiseViolation(
            f"KwikSort with p={p} needs {p} passes, stream allows {stream.pass_budget}")
    n = stream.n
    rng = make_rng(check_seed(seed))
    sequence = rng.permutation(n)
    sizes = kwiksort_group_sizes(n, p, c)
    blocks = _Blocks(n)
    meter = stream.meter
    after_pass = []
    start = 0
    for size in sizes:
        group = sequence[start:start + size]
        start += size
        if size == 0:
            continue
        is_pivot = np.zeros(n, dtype=bool)
        is_pivot[group] = True
        blk = blocks.where.copy()
        stored = []
        count = 0
        for chunk in stream.passes(batch):
            t, h = chunk[:, 0], chunk[:, 1]
            keep = (blk[t] == blk[h]) & (is_pivot[t] | is_pivot[h])
            if keep.any():
                stored.append(chunk[keep])
                count += int(keep.sum())
                meter.set_stored(count)
        E = np.concatenate(stored) if stored else np.zeros((0, 2), dtype=np.int64)
        keys = np.minimum(E[:, 0], E[:, 1]).astype(np.int64) * n + np.maximum(E[:, 0], E[:, 1])
        if np.unique(keys).shape[0] != keys.shape[0]:
            raise PromiseViolation("stream repeats a vertex pair; not a tournament")
        beats = _group_by(E[is_pivot[E[:, 1]]], key_col=1, val_col=0)   # u -> pivot
        beaten = _group_by(E[is_pivot[E[:, 0]]], key_col=0, val_col=1)  # pivot -> w
        for v in group.tolist():
            b = int(blocks.where[v])
            members = blocks.members[b]
            if len(members) == 1:
                continue
            ins, outs = beats.get(v, set()), beaten.get(v, set())
            before = [u for u in members if u in ins]
            after = [u for u in members if u in outs]
            if len(before) + len(after) != len(members) - 1:
                raise PromiseViolation(
                    f"pivot {v} is missing edges to its sub-problem; not a tournament")
            blocks.split(b, before, v, after)
        meter.release_stored()
        after_pass.append(blocks.max_size())
    order = [v for part in blocks for v in part]
    return FasResult(Ordering(order), meter=meter.snapshot(),
                     diagnostics={"group_sizes": sizes,
                                  "max_subproblem_after_pass": after_pass})


def _group_by(E: np.ndarray, key_col: int, val_col: int) -> dict[int, set]:
    out: dict[int, set] = {}
    for k, v in zip(E[:, key_col].tolist(), E[:, val_col].tolist()):
        out.setdefault(k, set()).add(v)
    return out


def fas_degree_order(stream: EdgeStream, batch: int = 1 << 16) -> FasResult:
    """Ascending in-degree, ties by vertex id. A 5-approximation."""
    n = stream.n
    indeg = np.zeros(n, dtype=np.int64)
    stream.meter.set_aux(n)
    for chunk in stream.passes(batch):
        indeg += np.bincount(chunk[:, 1], minlength=n)
    order = np.argsort(indeg, kind="stable")
    return FasResult(Ordering(order), meter=stream.meter.snapshot())


def eps_oracle(t: Tournament, eps: float, sigma: Ordering) -> float:
    """Return ``m = C(n,2)/2`` when ``|B_T(sigma)|`` is within ``(1 +- eps/2) m``, else the exact count."""
    b = count_back_edges(t, sigma)
    m = t.n * (t.n - 1) / 4
    if (1 - eps / 2) * m < b < (1 + eps / 2) * m:
        return m
    return float(b)


class SketchFAS(StreamEstimator):
    """One-pass sketch FAS estimator.

    Examples
    --------
    >>> from digraphstream.streamgen import gen_tou, random_ordering
    >>> pi = random_ordering(5, seed=3)
    >>> SketchFAS(eps=0.3, random_state=0).fit_predict(gen_tou(pi)) == pi
    True
    """

    def __init__(self, eps=0.2, c_sketch=DEFAULT_C_SKETCH, enum_cap=10, random_state=None):
        self.eps = eps
        self.c_sketch = c_sketch
        self.enum_cap = enum_cap
        self.random_state = random_state

    def fit(self, X, y=None):
        stream = check_stream(X, policy="as-given", pass_budget=1)
        res = fas_one_pass_sketch(stream, self.eps, check_seed(self.random_state),
                                  self.enum_cap, self.c_sketch)
        return self._store(res)


class KwikSortFAS(StreamEstimator):
    def __init__(self, n_passes=2, c=4.0, random_state=None):
        self.n_passes = n_passes
        self.c = c
        self.random_state = random_state

    def fit(self, X, y=None):
        stream = check_stream(X, policy="as-given", pass_budget=self.n_passes)
        res = fas_kwiksort_stream(stream, self.n_passes, self.c, check_seed(self.random_state))
        return self._store(res)


class DegreeOrderFAS(StreamEstimator):
    def fit(self, X, y=None):
        return self._store(fas_degree_order(check_stream(X)))
