"""Sink finding in acyclic tournaments.

A vertex's rank is its out-degree, so the sink has rank 0 and in-degree
``n - 1``. Both algorithms walk down the ranks by sampling out-neighbors of
a low-rank vertex.

* :func:`sink_multipass` uses ``2p - 1`` passes and ``O(n^{1/p} log p)``
  words on any edge order.
* :func:`sink_random_order_onepass` uses one pass and polylog space, but
  needs a uniformly shuffled stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .base import StreamEstimator
from .exceptions import AlgorithmFailure, PromiseViolation, RegimeError
from .graphcore import Tournament
from .streamgen import EdgeStream, make_rng
from .validation import check_positive_int, check_seed, check_stream

__all__ = [
    "SinkResult",
    "OnePassConstants",
    "FULL_CONSTANTS",
    "SCALED_CONSTANTS",
    "sink_multipass",
    "sink_random_order_onepass",
    "onepass_schedule",
    "true_sink",
    "verify_sink",
    "MultiPassSinkFinder",
    "RandomOrderSinkFinder",
]


@dataclass
class SinkResult:
    vertex: int
    meter: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def as_attributes(self) -> dict:
        return {"sink_": self.vertex, "meter_": self.meter, "diagnostics_": self.diagnostics}


def true_sink(t: Tournament) -> int:
    """Offline: the vertex with out-degree 0 (raises if there is none)."""
    out = t.out_degrees()
    hits = np.flatnonzero(out == 0)
    if hits.shape[0] != 1:
        raise PromiseViolation("tournament has no unique sink")
    return int(hits[0])


def verify_sink(stream: EdgeStream, v: int) -> bool:
    """One verification pass: does ``v`` have no outgoing edge?"""
    for chunk in stream.passes():
        if (chunk[:, 0] == v).any():
            return False
    return True


def sink_multipass(stream: EdgeStream, p: int, seed: int = 0,
                   batch: int = 1 << 16) -> SinkResult:
    """``2p - 1`` passes: alternate a max-in-degree pass and a sampling pass.

    ``S_1`` holds ``s = ceil(n^{1/p} ln 3p)`` random vertices. Odd pass ``2i - 1``
    counts full in-degrees of ``S_i`` and takes ``v_i``, the member with the
    largest in-degree (lowest rank). Even pass ``2i`` reservoir-samples ``s``
    out-neighbors of ``v_i`` as ``S_{i+1}``. Each step cuts the rank by a
    factor ``n^{1/p}`` with probability ``1 - 1/(3p)``.
    """
    p = check_positive_int(p, "p")
    n = stream.n
    if n < 1:
        raise PromiseViolation("empty vertex set has no sink")
    if n > 1 and p > max(1, math.floor(math.log2(n))):
        raise PromiseViolation(f"p={p} exceeds log2(n)={math.log2(n):.2f}")
    if stream.pass_budget - stream.passes_used < 2 * p - 1:
        raise PromiseViolation(f"sink_multipass needs {2 * p - 1} passes")
    rng = make_rng(check_seed(seed))
    s = math.ceil(n ** (1.0 / p) * math.log(3 * p))
    S = np.arange(n) if s >= n else np.sort(rng.choice(n, size=s, replace=False))
    meter = stream.meter
    chain = []
    for i in range(1, p + 1):
        in_S = np.zeros(n, dtype=bool)
        in_S[S] = True
        indeg = np.zeros(n, dtype=np.int64)
        outdeg = np.zeros(n, dtype=np.int64)
        meter.set_aux(2 * S.shape[0])
        for chunk in stream.passes(batch):
            t, h = chunk[:, 0], chunk[:, 1]
            indeg += np.bincount(h[in_S[h]], minlength=n)
            outdeg += np.bincount(t[in_S[t]], minlength=n)
        if (indeg[S] + outdeg[S] != n - 1).any():
            raise PromiseViolation("a sampled vertex does not meet every other vertex once")
        # argmax over S breaks ties towards the smallest id because S is sorted
        v = int(S[np.argmax(indeg[S])])
        chain.append(v)
        if i == p or outdeg[v] == 0:
            break
        S = _reservoir_out_neighbors(stream, v, s, rng, batch)
    return SinkResult(chain[-1], meter=meter.snapshot(),
                      diagnostics={"s": s, "chain": chain})


def _reservoir_out_neighbors(stream: EdgeStream, v: int, s: int, rng, batch: int) -> np.ndarray:
    """Algorithm R over the heads of ``v``'s out-edges in one pass."""
    reservoir: list[int] = []
    seen = 0
    for chunk in stream.passes(batch):
        for w in chunk[chunk[:, 0] == v, 1].tolist():
            seen += 1
            if seen <= s:
                reservoir.append(w)
                stream.meter.set_stored(len(reservoir))
            else:
                j = int(rng.integers(seen))
                if j < s:
                    reservoir[j] = w
    stream.meter.release_stored()
    return np.array(sorted(reservoir), dtype=np.int64)


@dataclass(frozen=True)
class OnePassConstants:
    """Constants of the one-pass algorithm.

    ``a`` sets the sample size ``a log n``, ``b`` the segment lengths
    ``b 2^i (n-1) log n``, ``cap`` the list cap ``cap log n``, ``probe`` the
    probe-segment fraction of ``m`` and ``tail`` the minimum final-segment
    fraction.
    """

    a: float = 200.0
    b: float = 100.0
    cap: float = 220.0
    probe: float = 1.0 / 1000
    tail: float = 499.0 / 500


FULL_CONSTANTS = OnePassConstants()
#: Scaled for n in the thousands; the segment schedule gives k = 1 at n = 4096.
SCALED_CONSTANTS = OnePassConstants(a=20.0, b=10.0, cap=22.0, probe=1.0 / 100, tail=0.85)


def onepass_schedule(n: int, consts: OnePassConstants = FULL_CONSTANTS) -> dict:
    """Segment arithmetic for the one-pass algorithm.

    ``k`` is the largest count of segments whose total length leaves room
    for the probe segment and the reserved tail. Under the default constants
    this is ``floor(log2(m / (200000 (n-1) log n)))``.
    """
    m = n * (n - 1) // 2
    L = math.log2(n) if n > 1 else 0.0
    probe_len = math.ceil(consts.probe * m)
    reserved_tail = math.ceil(consts.tail * m)
    room = m - probe_len - reserved_tail
    segments = []
    total = 0
    i = 1
    while True:
        c = math.ceil(consts.b * 2 ** i * (n - 1) * L)
        if c <= 0 or total + c > room:
            break
        segments.append(c)
        total += c
        i += 1
    return {
        "m": m,
        "log_n": L,
        "s": min(n, math.ceil(consts.a * L)),
        "cap_size": math.floor(consts.cap * L),
        "segments": segments,
        "k": len(segments),
        "probe_len": probe_len,
        "tail_len": m - total - probe_len,
    }


def sink_random_order_onepass(stream: EdgeStream,
                              constants: OnePassConstants = FULL_CONSTANTS,
                              seed: int = 0) -> SinkResult:
    """One pass over a randomly ordered stream of an acyclic tournament.

    Segment ``i`` collects, for every ``v`` in the current sample ``S``, its
    out-edges ``S_v`` (dropping a list once it passes the cap). A vertex
    whose list size falls in ``a log n +- 10%`` has rank about ``n / 2^i``,
    and its out-neighbors become the next ``S``. After ``k`` segments the
    probe segment collects ``P``, the heads of out-edges from ``S``. The
    rest of the stream eliminates every member of ``P`` that shows an
    out-edge; the smallest surviving id is returned.

    Raises
    ------
    RegimeError
        If ``n`` is too small for the segment schedule (``k < 1``).
    AlgorithmFailure
        If no vertex lands in the window, or every member of ``P`` is eliminated.
    """
    n = stream.n
    sched = onepass_schedule(n, constants)
    if sched["k"] < 1:
        raise RegimeError(
            f"n={n} is below the regime of the one-pass constants {constants}; no full segment fits")
    if stream.m != sched["m"]:
        raise PromiseViolation(f"stream has {stream.m} edges, a tournament on {n} has {sched['m']}")
    rng = make_rng(check_seed(seed))
    meter = stream.meter
    L = sched["log_n"]
    cap_size = sched["cap_size"]
    target = constants.a * L
    lo, hi = 0.9 * target, 1.1 * target
    S = np.sort(rng.choice(n, size=sched["s"], replace=False))
    picks = []

    stream.begin_pass()
    for seg_len in sched["segments"]:
        E = stream.next_batch(seg_len)
        in_S = np.zeros(n, dtype=bool)
        in_S[S] = True
        mine = E[in_S[E[:, 0]]]
        tails, heads = mine[:, 0], mine[:, 1]
        # position of each edge within its tail's list, in stream order
        order = np.argsort(tails, kind="stable")
        st = tails[order]
        starts = np.r_[0, np.flatnonzero(st[1:] != st[:-1]) + 1] if st.shape[0] else np.zeros(0, int)
        rank_sorted = np.arange(st.shape[0]) - np.repeat(starts, np.diff(np.r_[starts, st.shape[0]]))
        within = np.empty_like(rank_sorted)
        within[order] = rank_sorted
        events = np.where(within < cap_size, 1, np.where(within == cap_size, -cap_size, 0))
        peak = int(np.cumsum(events).max()) if events.shape[0] else 0
        meter.record_peak(peak)

        counts = np.bincount(tails, minlength=n)
        alive = counts <= cap_size
        ok = in_S & alive & (counts >= lo) & (counts <= hi)
        cand = np.flatnonzero(ok)
        if cand.shape[0] == 0:
            raise AlgorithmFailure("no sampled vertex has an out-list in the target window")
        dist = np.abs(counts[cand] - target)
        v = int(cand[np.argmin(dist)])        # ties go to the smallest id
        picks.append(v)
        S = np.unique(heads[tails == v])
        meter.record_peak(S.shape[0])

    # probe segment: P = heads of out-edges from S
    E = stream.next_batch(sched["probe_len"])
    in_S = np.zeros(n, dtype=bool)
    in_S[S] = True
    in_P = np.zeros(n, dtype=bool)
    in_P[E[in_S[E[:, 0]], 1]] = True
    meter.record_peak(S.shape[0], n)

    # everything left: eliminate members of P with an out-edge
    while True:
        E = stream.next_batch(1 << 18)
        if E.shape[0] == 0:
            break
        in_P[E[:, 0]] = False
    survivors = np.flatnonzero(in_P)
    if survivors.shape[0] == 0:
        raise AlgorithmFailure("every probe candidate showed an outgoing edge")
    return SinkResult(int(survivors[0]), meter=meter.snapshot(),
                      diagnostics={"schedule": sched, "picks": picks,
                                   "survivors": int(survivors.shape[0])})


class MultiPassSinkFinder(StreamEstimator):
    """``(2p - 1)``-pass sink finder.

    Examples
    --------
    >>> from digraphstream.streamgen import gen_dyes
    >>> t = gen_dyes(64, seed=0)
    >>> MultiPassSinkFinder(p=1).fit_predict(t) == true_sink(t)
    True
    """

    _result_attr = "sink_"

    def __init__(self, p=2, random_state=None):
        self.p = p
        self.random_state = random_state

    def fit(self, X, y=None):
        p = self.p
        stream = check_stream(X, policy="as-given", pass_budget=2 * p - 1)
        return self._store(sink_multipass(stream, p, check_seed(self.random_state)))


class RandomOrderSinkFinder(StreamEstimator):
    _result_attr = "sink_"

    def __init__(self, constants=SCALED_CONSTANTS, random_state=None):
        self.constants = constants
        self.random_state = random_state

    def fit(self, X, y=None):
        seed = check_seed(self.random_state)
        stream = check_stream(X, policy="fixed-random-shuffle", pass_budget=1, seed=seed)
        return self._store(sink_random_order_onepass(stream, self.constants, seed))
