"""Rank aggregation under Kendall distance.

Pair counts ``x[idx(a, b)]`` (inputs placing ``a`` before ``b``, for
``a < b``) determine the cost of any candidate ``pi`` as
``||x - k y^pi||_1`` with ``y^pi = 1{pi(a) < pi(b)}``. The streaming
algorithm sketches ``x`` and minimizes the estimate over every candidate.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .base import StreamEstimator
from .exceptions import CapExceeded, ConfigError, PromiseViolation
from .fas import sketch_minimizer
from .graphcore import Ordering, kendall_distance, pair_arrays, pair_index, _popcount_table
from .l1sketch import DEFAULT_C_SKETCH, L1Sketch
from .streamgen import _read_text, _write_text, make_rng
from .validation import check_fraction, check_seed

__all__ = [
    "RankingStream",
    "AggrResult",
    "aggr_cost",
    "pair_counts",
    "rank_aggr_exact",
    "rank_aggr_sketch",
    "rank_aggr_pick_random",
    "gen_rankings",
    "to_triples",
    "read_rankings",
    "write_rankings",
    "SketchRankAggregator",
    "RandomPickAggregator",
    "ExactKemenyAggregator",
]


class RankingStream:
    """``k`` orderings of ``n`` objects, as full orderings or as triples.

    A triple ``(a, b, i)`` states that ordering ``i`` places ``a`` before
    ``b``. Iterating yields the triples in stream order; full orderings are
    expanded on the fly, pair by pair.
    """

    def __init__(self, n: int, k: int, orderings=None, triples=None):
        if (orderings is None) == (triples is None):
            raise ValueError("give exactly one of orderings or triples")
        self.n = int(n)
        self.k = int(k)
        if self.k < 1:
            raise ConfigError("need at least one input ordering")
        self.orderings = None
        self.triples = None
        if orderings is not None:
            orderings = [o if isinstance(o, Ordering) else Ordering(o) for o in orderings]
            if len(orderings) != self.k:
                raise PromiseViolation(f"header says k={self.k}, got {len(orderings)} orderings")
            for o in orderings:
                if o.n != self.n:
                    raise PromiseViolation(f"ordering has {o.n} objects, expected {self.n}")
            self.orderings = orderings
        else:
            tr = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
            _check_triples(tr, self.n, self.k)
            self.triples = tr
        self.passes_used = 0

    @property
    def form(self) -> str:
        return "full" if self.orderings is not None else "triples"

    def __iter__(self) -> Iterator[tuple[int, int, int]]:
        """One pass over the evidence as ``(a, b, i)`` triples."""
        self.passes_used += 1
        if self.triples is not None:
            yield from map(tuple, self.triples.tolist())
            return
        for i, o in enumerate(self.orderings):
            seq = o.tolist()
            for x in range(self.n):
                for y in range(x + 1, self.n):
                    yield seq[x], seq[y], i

    def to_orderings(self) -> list[Ordering]:
        """Reassemble the inputs (triple form must be complete)."""
        if self.orderings is not None:
            return list(self.orderings)
        if self.triples.shape[0] != self.k * self.n * (self.n - 1) // 2:
            raise PromiseViolation("triple stream is incomplete; cannot rebuild the orderings")
        before = np.zeros((self.k, self.n), dtype=np.int64)
        for a, b, i in self.triples.tolist():
            before[i, a] += 1
        # the object preceding all others has n - 1 "before" triples
        return [Ordering(np.argsort(-before[i], kind="stable")) for i in range(self.k)]


def _check_triples(tr: np.ndarray, n: int, k: int):
    if tr.shape[0] == 0:
        return
    a, b, i = tr[:, 0], tr[:, 1], tr[:, 2]
    if (a < 0).any() or (b < 0).any() or (a >= n).any() or (b >= n).any():
        raise PromiseViolation(f"triple object id outside [0, {n})")
    if (i < 0).any() or (i >= k).any():
        raise PromiseViolation(f"triple ordering index outside [0, {k})")
    if (a == b).any():
        raise PromiseViolation("triple compares an object with itself")
    key = (pair_index(np.minimum(a, b), np.maximum(a, b), n)) * k + i
    if np.unique(key).shape[0] != key.shape[0]:
        raise PromiseViolation("triples repeat or contradict a (pair, ordering) entry")


def pair_counts(sigmas: Sequence[Ordering]) -> np.ndarray:
    """Dense ``x``: for each pair ``a < b``, the number of inputs with ``a`` first."""
    n = sigmas[0].n
    us, vs = pair_arrays(n)
    x = np.zeros(us.shape[0], dtype=np.int64)
    for s in sigmas:
        pos = s.position
        x += pos[us] < pos[vs]
    return x


def aggr_cost(pi: Ordering, sigmas: Sequence[Ordering]) -> int:
    """``sum_i d(pi, sigma_i)``."""
    if not sigmas:
        raise ValueError("need at least one input ordering")
    for s in sigmas:
        if s.n != pi.n:
            raise ValueError(f"ordering sizes differ: {pi.n} vs {s.n}")
    return int(sum(kendall_distance(pi, s) for s in sigmas))


def rank_aggr_exact(sigmas: Sequence[Ordering], cap: int = 12) -> tuple[Ordering, int]:
    """Kemeny optimum by subset DP.

    ``f(S) = min_v f(S - v) + sum_{u in S - v} W[v, u]`` where ``W[v, u]``
    counts inputs placing ``v`` before ``u``: placing ``v`` last among ``S``
    disagrees with exactly those inputs.
    """
    sigmas = [s if isinstance(s, Ordering) else Ordering(s) for s in sigmas]
    if not sigmas:
        raise ValueError("need at least one input ordering")
    n = sigmas[0].n
    if n > cap:
        raise CapExceeded(f"n={n} exceeds cap={cap}")
    if n == 0:
        return Ordering([]), 0
    W = np.zeros((n, n), dtype=np.int64)
    for s in sigmas:
        pos = s.position
        W += pos[:, None] < pos[None, :]
    full = 1 << n
    masks = np.arange(full, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(np.int64)
    # add[S, v] = sum_{u in S} W[v, u]
    add = bits @ W.T
    f = np.full(full, np.iinfo(np.int64).max // 2, dtype=np.int64)
    last = np.zeros(full, dtype=np.int64)
    f[0] = 0
    pc = _popcount_table(n)
    for size in range(1, n + 1):
        S = masks[pc == size]
        best = np.full(S.shape[0], np.iinfo(np.int64).max // 2, dtype=np.int64)
        arg = np.zeros(S.shape[0], dtype=np.int64)
        for v in range(n):
            has = (S >> v) & 1 == 1
            rest = S[has] & ~(1 << v)
            cand = f[rest] + add[rest, v]
            better = cand < best[has]
            idx = np.flatnonzero(has)[better]
            best[idx] = cand[better]
            arg[idx] = v
        f[S] = best
        last[S] = arg
    order = []
    S = full - 1
    while S:
        v = int(last[S])
        order.append(v)
        S &= ~(1 << v)
    return Ordering(order[::-1]), int(f[full - 1])


@dataclass
class AggrResult:
    ordering: Ordering
    estimated_cost: float | None = None
    meter: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def as_attributes(self) -> dict:
        return {"ordering_": self.ordering, "estimated_cost_": self.estimated_cost,
                "meter_": self.meter, "diagnostics_": self.diagnostics}


def rank_aggr_sketch(stream: RankingStream, eps: float, seed: int = 0, enum_cap: int = 10,
                     c_sketch: float = DEFAULT_C_SKETCH) -> AggrResult:
    """One pass of +1 updates at ``idx(a, b)`` per "``a`` before ``b``, ``a < b``" triple.

    Post-processing minimizes the sketched ``||x - k y^pi||_1`` over all
    ``n!`` candidates, ties broken lexicographically.
    """
    eps = check_fraction(eps, "eps")
    n, k = stream.n, stream.k
    if n > enum_cap:
        raise CapExceeded(f"n={n} exceeds enum_cap={enum_cap} (n! post-processing)")
    if n < 2:
        return AggrResult(Ordering.identity(n), 0.0)
    sketch = sketch_for(n, eps, seed, c_sketch)
    for a, b, _ in stream:
        if a < b:
            sketch.update(pair_index(a, b, n), 1)
    pi, est = sketch_minimizer(sketch, n, scale=float(k))
    return AggrResult(pi, est, meter={"passes_used": 1, "sketch_words": sketch.d,
                                      "stored_items_peak": sketch.d},
                      diagnostics={"sketch": sketch})


def sketch_for(n: int, eps: float, seed: int, c_sketch: float = DEFAULT_C_SKETCH) -> L1Sketch:
    """The ``(eps/3, 1/(3 n!))`` sketch over ``C(n, 2)`` pair coordinates."""
    log_inv_delta = math.log(3.0) + math.lgamma(n + 1)
    return L1Sketch(n * (n - 1) // 2, eps / 3.0, math.exp(-log_inv_delta),
                    seed=check_seed(seed), c_sketch=c_sketch, log_inv_delta=log_inv_delta)


def rank_aggr_pick_random(sigmas: Sequence[Ordering], seed=None) -> Ordering:
    """A uniformly chosen input; a 2-approximation in expectation."""
    if len(sigmas) == 0:
        raise ValueError("need at least one input ordering")
    i = int(make_rng(seed).integers(len(sigmas)))
    s = sigmas[i]
    return s if isinstance(s, Ordering) else Ordering(s)


def gen_rankings(n: int, k: int, seed, noise: float | None = None) -> list[Ordering]:
    """``k`` uniform orderings, or noisy copies of one centre when ``noise`` is set.

    With ``noise``, each input is the centre with every adjacent pair swapped
    independently with probability ``noise`` (in one left-to-right sweep).
    """
    rng = make_rng(seed)
    if noise is None:
        return [Ordering(rng.permutation(n)) for _ in range(k)]
    centre = rng.permutation(n)
    out = []
    for _ in range(k):
        seq = centre.copy()
        for j in range(n - 1):
            if rng.random() < noise:
                seq[j], seq[j + 1] = seq[j + 1], seq[j]
        out.append(Ordering(seq))
    return out


def write_rankings(dest, n: int, sigmas: Sequence[Ordering] | None = None, triples=None):
    """Header ``n k`` then ``k`` full orderings, or ``a b i`` triple lines."""
    buf = io.StringIO()
    if sigmas is not None:
        buf.write(f"{n} {len(sigmas)}\n")
        for s in sigmas:
            buf.write(" ".join(map(str, s.tolist())) + "\n")
    else:
        tr = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
        k = int(tr[:, 2].max()) + 1 if tr.shape[0] else 0
        buf.write(f"{n} {k}\n")
        for a, b, i in tr.tolist():
            buf.write(f"{a} {b} {i}\n")
    _write_text(dest, buf.getvalue())


def read_rankings(src) -> RankingStream:
    """Parse a ranking file; the body form is detected from the token count per line."""
    lines = [ln.split() for ln in _read_text(src).splitlines()]
    lines = [ln for ln in lines if ln and not ln[0].startswith("#")]
    if not lines or len(lines[0]) != 2:
        raise ConfigError("ranking file needs an 'n k' header")
    n, k = int(lines[0][0]), int(lines[0][1])
    body = lines[1:]
    widths = {len(ln) for ln in body}
    if not body:
        raise ConfigError("ranking file has no body")
    if len(widths) != 1:
        raise ConfigError("ranking file mixes line formats")
    width = widths.pop()
    rows = [[int(t) for t in ln] for ln in body]
    # n == 3 makes both forms three tokens wide; k full lines is the tie-breaker
    if width == n and (n != 3 or len(rows) == k):
        return RankingStream(n, k, orderings=[Ordering(r) for r in rows])
    if width == 3:
        return RankingStream(n, k, triples=rows)
    raise ConfigError(f"cannot parse ranking lines with {width} tokens for n={n}")


def to_triples(sigmas: Sequence[Ordering], seed=None) -> np.ndarray:
    """All ``k C(n, 2)`` triples of the inputs, shuffled when ``seed`` is given."""
    rows = []
    for i, s in enumerate(sigmas):
        seq = s.tolist()
        for x in range(len(seq)):
            for y in range(x + 1, len(seq)):
                rows.append((seq[x], seq[y], i))
    tr = np.array(rows, dtype=np.int64).reshape(-1, 3)
    if seed is not None:
        tr = tr[make_rng(seed).permutation(tr.shape[0])]
    return tr


def _as_ranking_stream(X) -> RankingStream:
    if isinstance(X, RankingStream):
        return X
    sigmas = [s if isinstance(s, Ordering) else Ordering(s) for s in X]
    if not sigmas:
        raise ConfigError("need at least one input ordering")
    return RankingStream(sigmas[0].n, len(sigmas), orderings=sigmas)


class SketchRankAggregator(StreamEstimator):
    """Streaming ``(1 + eps)`` rank aggregation.

    Examples
    --------
    >>> sig = [Ordering([0, 1, 2, 3])] * 3
    >>> SketchRankAggregator(eps=0.3, random_state=0).fit_predict(sig).tolist()
    [0, 1, 2, 3]
    """

    def __init__(self, eps=0.2, c_sketch=DEFAULT_C_SKETCH, enum_cap=10, random_state=None):
        self.eps = eps
        self.c_sketch = c_sketch
        self.enum_cap = enum_cap
        self.random_state = random_state

    def fit(self, X, y=None):
        stream = _as_ranking_stream(X)
        res = rank_aggr_sketch(stream, self.eps, check_seed(self.random_state),
                               self.enum_cap, self.c_sketch)
        return self._store(res)


class RandomPickAggregator(StreamEstimator):
    def __init__(self, random_state=None):
        self.random_state = random_state

    def fit(self, X, y=None):
        sigmas = _as_ranking_stream(X).to_orderings()
        self.ordering_ = rank_aggr_pick_random(sigmas, self.random_state)
        return self


class ExactKemenyAggregator(StreamEstimator):
    def __init__(self, cap=12):
        self.cap = cap

    def fit(self, X, y=None):
        sigmas = _as_ranking_stream(X).to_orderings()
        self.ordering_, self.cost_ = rank_aggr_exact(sigmas, self.cap)
        return self
