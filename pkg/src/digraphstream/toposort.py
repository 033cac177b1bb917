"""Topological ordering from edge streams.

* :func:`toposort_tournament` sorts an acyclic tournament by in-degree.
* :func:`toposort_plantdag_largeq` and :func:`toposort_plantdag_smallq`
  recover the hidden order of a planted DAG; :func:`toposort_plantdag`
  picks whichever uses less space for the given ``q``.
* :func:`transitive_reduction_toposort` keeps the transitive reduction of
  the edges seen so far during one random-order pass.
* :func:`shortpath_dag_random_order` decides short ``s``-``t`` reachability
  with two distance arrays over a few random-order passes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .base import StreamEstimator
from .exceptions import AlgorithmFailure, NotATournamentOrder, PromiseViolation
from .graphcore import Digraph, Ordering
from .streamgen import EdgeStream, make_rng
from .validation import check_fraction, check_positive_int, check_seed, check_stream

__all__ = [
    "TopoResult",
    "toposort_tournament",
    "toposort_plantdag_largeq",
    "toposort_plantdag_smallq",
    "toposort_plantdag",
    "largeq_pass_budget",
    "use_largeq",
    "ReductionState",
    "transitive_reduction_toposort",
    "shortpath_dag_random_order",
    "gen_shortpath_instance",
    "TournamentTopoSort",
    "PlantedDAGTopoSort",
    "TransitiveReductionTopoSort",
    "ShortPathDAG",
]


@dataclass
class TopoResult:
    ordering: Ordering
    meter: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def as_attributes(self) -> dict:
        return {"ordering_": self.ordering, "meter_": self.meter,
                "diagnostics_": self.diagnostics}


def _in_degree_pass(stream: EdgeStream, batch: int) -> np.ndarray:
    n = stream.n
    indeg = np.zeros(n, dtype=np.int64)
    stream.meter.set_aux(n)
    for chunk in stream.passes(batch):
        indeg += np.bincount(chunk[:, 1], minlength=n)
    return indeg


def toposort_tournament(stream: EdgeStream, batch: int = 1 << 16) -> TopoResult:
    """One pass of in-degree counting; also decides whether the tournament is acyclic.

    A tournament is acyclic exactly when its in-degrees are ``0, 1, ..., n-1``.
    """
    n = stream.n
    if stream.m != n * (n - 1) // 2:
        raise NotATournamentOrder(f"{stream.m} edges cannot form a tournament on {n} vertices")
    indeg = _in_degree_pass(stream, batch)
    order = np.argsort(indeg, kind="stable")
    if not np.array_equal(indeg[order], np.arange(n)):
        raise NotATournamentOrder("in-degrees are not 0..n-1; no tournament topological order")
    return TopoResult(Ordering(order), meter=stream.meter.snapshot())


def _unique_topological_order(n: int, vertices: np.ndarray, edges: np.ndarray) -> list[int] | None:
    """Kahn's algorithm on the subgraph induced by ``vertices``.

    Returns the order if it is the only topological order (a Hamiltonian
    path is present), else None.
    """
    local = {int(v): i for i, v in enumerate(vertices.tolist())}
    k = len(local)
    succ: list[list[int]] = [[] for _ in range(k)]
    indeg = [0] * k
    for a, b in edges.tolist():
        ia, ib = local[a], local[b]
        succ[ia].append(ib)
        indeg[ib] += 1
    sources = [i for i in range(k) if indeg[i] == 0]
    out = []
    while sources:
        if len(sources) != 1:
            return None
        i = sources.pop()
        out.append(int(vertices[i]))
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                sources.append(j)
    return out if len(out) == k else None


def largeq_pass_budget(n: int) -> int:
    """Three passes per halving phase plus the final storing pass."""
    return 3 * (math.ceil(math.log2(max(n, 2))) + 1) + 1


def toposort_plantdag_largeq(stream: EdgeStream, q: float, c_piv: float = 4.0, seed: int = 0,
                             batch: int = 1 << 16) -> TopoResult:
    """Pivot recursion for dense planted DAGs.

    Each phase picks ``ceil(c_piv log2 n)`` random pivots in every
    sub-problem with at least ``1/q^2`` vertices, and uses three passes per
    phase. Pass ``i`` grows ``L_i`` (vertices with a path of length at most
    ``i`` to the pivot) and ``R_i`` (from the pivot). Pass 3 also stores the
    edges inside ``U``, the vertices outside ``L_2``, ``R_2`` and the pivot.
    A vertex is before the pivot when a stored ``U`` chain leads into
    ``L_3``, after it when a chain leads out of ``R_3``. Sub-problems split
    by the pivots' verdicts. Once all sub-problems are small, one more pass
    stores their internal edges and they are sorted exactly.

    Raises
    ------
    AlgorithmFailure
        If a vertex cannot be classified, verdicts disagree, or a small
        sub-problem has no unique order.
    """
    q = check_fraction(q, "q", closed_low=True, closed_high=True)
    n = stream.n
    rng = make_rng(check_seed(seed))
    meter = stream.meter
    threshold = max(2.0, 1.0 / q ** 2) if q > 0 else math.inf
    n_piv = max(1, math.ceil(c_piv * math.log2(max(n, 2))))
    blocks: list[np.ndarray] = [np.arange(n)]
    blk = np.zeros(n, dtype=np.int64)
    phases = 0
    max_u = 0
    while any(b.shape[0] >= threshold for b in blocks):
        phases += 1
        pivots, owner = [], []
        for bi, members in enumerate(blocks):
            if members.shape[0] >= threshold:
                chosen = np.unique(rng.choice(members, size=n_piv, replace=True))
                pivots.extend(chosen.tolist())
                owner.extend([bi] * chosen.shape[0])
        pivots = np.array(pivots, dtype=np.int64)
        owner = np.array(owner, dtype=np.int64)
        P = pivots.shape[0]
        prow = np.arange(P)
        # membership of each vertex in the pivot's own sub-problem
        home = blk[None, :] == owner[:, None]
        L = np.zeros((P, n), dtype=bool)
        R = np.zeros((P, n), dtype=bool)
        L[prow, pivots] = True     # the pivot seeds both searches
        R[prow, pivots] = True
        frozen = None
        u_rows = []
        n_stored = 0
        for step in (1, 2, 3):
            if step == 3:
                U = home & ~L & ~R
                max_u = max(max_u, int(U.sum(axis=1).max()))
                frozen = U
            newL, newR = L.copy(), R.copy()
            for chunk in stream.passes(batch):
                t, h = chunk[:, 0], chunk[:, 1]
                intra = blk[t] == blk[h]
                t, h = t[intra], h[intra]
                if t.shape[0] == 0:
                    continue
                A = sparse.csr_matrix((np.ones(t.shape[0], dtype=np.float32), (t, h)),
                                      shape=(n, n))
                # u in L_{i} if u -> w for some w in L_{i-1}
                newL |= (A @ L.T.astype(np.float32)).T > 0
                newR |= (A.T @ R.T.astype(np.float32)).T > 0
                if step == 3:
                    rows, ti, hi = _edges_inside(frozen, owner, blk, t, h)
                    if rows.shape[0]:
                        u_rows.append(np.stack([rows, ti, hi], axis=1))
                        n_stored += rows.shape[0]
                        meter.set_stored(n_stored)
            L, R = newL & home, newR & home
            meter.set_aux(int(L.sum() + R.sum()))
        U_edges = np.concatenate(u_rows) if u_rows else np.zeros((0, 3), dtype=np.int64)
        L[prow, pivots] = False
        R[prow, pivots] = False
        before = _close_backward(L, U_edges)
        after = _close_forward(R, U_edges)
        meter.release_stored()
        if (before & after).any():
            raise AlgorithmFailure("a vertex is classified both before and after a pivot")
        unclassified = home & ~before & ~after
        unclassified[prow, pivots] = False
        if unclassified.any():
            raise AlgorithmFailure(
                f"{int(unclassified.sum())} vertex-pivot relations left unclassified")
        blocks = _split_blocks(blocks, pivots, owner, after)
        blk = np.empty(n, dtype=np.int64)
        for bi, members in enumerate(blocks):
            blk[members] = bi

    # final pass: store every edge inside the remaining small sub-problems
    kept = []
    count = 0
    if any(b.shape[0] > 1 for b in blocks):
        for chunk in stream.passes(batch):
            sel = blk[chunk[:, 0]] == blk[chunk[:, 1]]
            if sel.any():
                kept.append(chunk[sel])
                count += int(sel.sum())
                meter.set_stored(count)
    E = np.concatenate(kept) if kept else np.zeros((0, 2), dtype=np.int64)
    eb = blk[E[:, 0]] if E.shape[0] else np.zeros(0, dtype=np.int64)
    order = []
    for bi, members in enumerate(blocks):
        if members.shape[0] == 1:
            order.append(int(members[0]))
            continue
        sub = _unique_topological_order(n, members, E[eb == bi])
        if sub is None:
            raise AlgorithmFailure("a small sub-problem has no unique topological order")
        order.extend(sub)
    meter.release_stored()
    return TopoResult(Ordering(order), meter=meter.snapshot(),
                      diagnostics={"phases": phases, "passes": stream.passes_used,
                                   "max_u": max_u, "pivots_per_subproblem": n_piv})


def _edges_inside(U: np.ndarray, owner: np.ndarray, blk: np.ndarray, t: np.ndarray, h: np.ndarray):
    """Rows ``(pivot_row, t, h)`` for edges with both endpoints in that pivot's ``U``."""
    rows, ts, hs = [], [], []
    eb = blk[t]
    for b in np.unique(owner).tolist():
        prs = np.flatnonzero(owner == b)
        sel = np.flatnonzero(eb == b)
        if sel.shape[0] == 0:
            continue
        tb, hb = t[sel], h[sel]
        both = U[np.ix_(prs, tb)] & U[np.ix_(prs, hb)]
        r, e = np.nonzero(both)
        rows.append(prs[r])
        ts.append(tb[e])
        hs.append(hb[e])
    if not rows:
        z = np.zeros(0, dtype=np.int64)
        return z, z, z
    return np.concatenate(rows), np.concatenate(ts), np.concatenate(hs)


def _close_backward(seed: np.ndarray, E: np.ndarray) -> np.ndarray:
    """Rows of ``seed`` plus every vertex with a chain of ``E`` edges into the row's set."""
    reach = seed.copy()
    if E.shape[0] == 0:
        return reach
    r, t, h = E[:, 0], E[:, 1], E[:, 2]
    while True:
        grow = reach[r, h] & ~reach[r, t]
        if not grow.any():
            return reach
        reach[r[grow], t[grow]] = True


def _close_forward(seed: np.ndarray, E: np.ndarray) -> np.ndarray:
    reach = seed.copy()
    if E.shape[0] == 0:
        return reach
    r, t, h = E[:, 0], E[:, 1], E[:, 2]
    while True:
        grow = reach[r, t] & ~reach[r, h]
        if not grow.any():
            return reach
        reach[r[grow], h[grow]] = True


def _split_blocks(blocks, pivots, owner, after) -> list[np.ndarray]:
    """Cut each pivoted sub-problem at its pivots.

    Every vertex is keyed by how many of its sub-problem's pivots precede
    it. Pivots must receive distinct keys and each vertex's verdicts must be
    consistent with that pivot order.
    """
    out = []
    for bi, members in enumerate(blocks):
        prs = np.flatnonzero(owner == bi)
        if prs.shape[0] == 0:
            out.append(members)
            continue
        A = after[np.ix_(prs, members)]          # A[j, x]: member x comes after pivot j
        key = A.sum(axis=0)
        piv = pivots[prs]
        pos_in = {int(v): i for i, v in enumerate(members.tolist())}
        pkey = np.array([key[pos_in[int(v)]] for v in piv])
        k = prs.shape[0]
        if sorted(pkey.tolist()) != list(range(k)):
            raise AlgorithmFailure("pivot verdicts do not define a consistent pivot order")
        rank_of = np.empty(k, dtype=np.int64)
        rank_of[np.argsort(pkey)] = np.arange(k)
        # a vertex after exactly `key` pivots must be after the first `key` in pivot order
        expect = rank_of[:, None] < key[None, :]
        is_piv = np.zeros(members.shape[0], dtype=bool)
        is_piv[[pos_in[int(v)] for v in piv]] = True
        if (expect[:, ~is_piv] != A[:, ~is_piv]).any():
            raise AlgorithmFailure("a vertex's pivot verdicts are not consistent with the pivot order")
        piv_sorted = piv[np.argsort(pkey)]
        for a in range(k + 1):
            part = members[(key == a) & ~is_piv]
            if part.shape[0]:
                out.append(part)
            if a < k:
                out.append(np.array([piv_sorted[a]], dtype=np.int64))
    return out


def toposort_plantdag_smallq(stream: EdgeStream, q: float, c_win: float = 4.0,
                             batch: int = 1 << 16) -> TopoResult:
    """Two passes for sparse planted DAGs.

    Pass 1 counts in-degrees. Pass 2 keeps edges whose endpoints' in-degrees
    differ by at most ``3 sqrt(c_win n q ln n) + 1``; consecutive vertices of the
    hidden order fall inside this window with high probability. The additive 1
    covers the rank term ``q`` and the source, whose in-degree lacks the path
    edge, so the window stays correct as ``q`` approaches 0. The kept
    graph is then sorted, and must have a unique topological order.
    """
    q = check_fraction(q, "q", closed_low=True, closed_high=True)
    n = stream.n
    indeg = _in_degree_pass(stream, batch)
    window = 3.0 * math.sqrt(c_win * n * q * math.log(max(n, 2))) + 1.0
    kept = []
    count = 0
    for chunk in stream.passes(batch):
        sel = np.abs(indeg[chunk[:, 0]] - indeg[chunk[:, 1]]) <= window
        if sel.any():
            kept.append(chunk[sel])
            count += int(sel.sum())
            stream.meter.set_stored(count)
    E = np.concatenate(kept) if kept else np.zeros((0, 2), dtype=np.int64)
    order = _unique_topological_order(n, np.arange(n), E)
    if order is None:
        raise AlgorithmFailure("retained edges do not pin down a unique order")
    return TopoResult(Ordering(order), meter=stream.meter.snapshot(),
                      diagnostics={"window": window, "stored_edges": count})


def use_largeq(n: int, q: float) -> bool:
    """``n/q <= n^{3/2} sqrt(q)`` exactly when ``q >= n^{-1/3}``."""
    return q >= n ** (-1.0 / 3.0)


def toposort_plantdag(stream: EdgeStream, q: float, c_piv: float = 4.0, c_win: float = 4.0,
                      seed: int = 0) -> TopoResult:
    if use_largeq(stream.n, q):
        res = toposort_plantdag_largeq(stream, q, c_piv, seed)
        res.diagnostics["branch"] = "largeq"
    else:
        res = toposort_plantdag_smallq(stream, q, c_win)
        res.diagnostics["branch"] = "smallq"
    return res


class ReductionState:
    """Transitive reduction of the edges ingested so far.

    ``reach`` is the transitive closure of the retained edges as an
    ``n x n`` boolean matrix; ``adj`` is the retained edge set.
    """

    def __init__(self, n: int):
        self.n = n
        self.adj = np.zeros((n, n), dtype=bool)
        self.reach = np.zeros((n, n), dtype=bool)
        self.retained = 0
        self.peak = 0

    def add(self, u: int, v: int) -> bool:
        """Ingest ``u -> v``; returns False when it is implied and skipped."""
        if u == v:
            raise PromiseViolation("self-loop in a DAG stream")
        if self.reach[v, u]:
            raise PromiseViolation(f"edge {u}->{v} closes a cycle")
        if self.reach[u, v]:
            return False
        A = np.flatnonzero(self.reach[:, u])
        A = np.append(A, u)
        D = np.flatnonzero(self.reach[v, :])
        D = np.append(D, v)
        block = np.ix_(A, D)
        self.retained -= int(self.adj[block].sum())
        self.adj[block] = False
        self.adj[u, v] = True
        self.retained += 1
        self.reach[block] = True
        self.peak = max(self.peak, self.retained)
        return True

    def edges(self) -> np.ndarray:
        return np.argwhere(self.adj)


def transitive_reduction_toposort(stream: EdgeStream, batch: int = 4096) -> TopoResult:
    """One random-order pass keeping the transitive reduction of the prefix.

    For a planted DAG the final reduction is the hidden Hamiltonian path,
    which is read off as the ordering. The reduction's size over time is the
    space cost; its peak is reported.
    """
    n = stream.n
    state = ReductionState(n)
    meter = stream.meter
    meter.set_aux(math.ceil(n * n / 64))
    for chunk in stream.passes(batch):
        # closure only grows, so anything implied now is implied later too
        fresh = chunk[~state.reach[chunk[:, 0], chunk[:, 1]]]
        for u, v in fresh.tolist():
            if state.add(u, v):
                meter.set_stored(state.retained)
    E = state.edges()
    order = _unique_topological_order(n, np.arange(n), E)
    if order is None or E.shape[0] != n - 1:
        raise AlgorithmFailure("retained edges are not a single Hamiltonian path")
    return TopoResult(Ordering(order), meter=meter.snapshot(),
                      diagnostics={"peak_retained": state.peak, "retained": state.retained})


def shortpath_dag_random_order(stream: EdgeStream, p: int, v_s: int, v_t: int,
                               batch: int = 1 << 14) -> bool:
    """``p`` passes with distance arrays ``d_s`` (from ``v_s``) and ``d_t`` (to ``v_t``).

    Returns True as soon as an edge ``(x, y)`` has ``d_s[x] + d_t[y] <= 2p + 1``.
    Distances only ever witness real paths, so True implies reachability.
    """
    p = check_positive_int(p, "p")
    n = stream.n
    inf = 2 * p + 3
    limit = 2 * p + 1
    d_s = [inf] * n
    d_t = [inf] * n
    d_s[v_s] = 0
    d_t[v_t] = 0
    stream.meter.set_aux(2 * n)
    for _ in range(p):
        for chunk in stream.passes(batch):
            for x, y in chunk.tolist():
                if d_s[x] + d_t[y] <= limit:
                    return True
                if d_s[x] + 1 < d_s[y]:
                    d_s[y] = d_s[x] + 1
                if d_t[y] + 1 < d_t[x]:
                    d_t[x] = d_t[y] + 1
    return False


def gen_shortpath_instance(n: int, length: int, reachable: bool = True, noise_edges: int | None = None,
                           seed=None) -> tuple[Digraph, int, int]:
    """A DAG with a planted ``v_s``-``v_t`` path of ``length`` edges and no shortcut.

    Off-path vertices form a random DAG and send edges into path vertices,
    but no edge leaves the path, so the planted path is the only route. With
    ``reachable=False`` one random path edge is dropped and ``v_t`` becomes
    unreachable.
    """
    if length + 1 > n:
        raise ValueError("path does not fit in n vertices")
    rng = make_rng(seed)
    perm = rng.permutation(n)
    path = perm[:length + 1]
    rest = perm[length + 1:]
    edges = [(int(path[i]), int(path[i + 1])) for i in range(length)]
    if not reachable:
        edges.pop(int(rng.integers(length)))
    if noise_edges is None:
        noise_edges = 2 * n
    if rest.shape[0]:
        a = rest[rng.integers(rest.shape[0], size=noise_edges)]
        b_rest = rest[rng.integers(rest.shape[0], size=noise_edges)]
        b_path = path[rng.integers(path.shape[0], size=noise_edges)]
        into_path = rng.random(noise_edges) < 0.5
        b = np.where(into_path, b_path, b_rest)
        rank = np.zeros(n, dtype=np.int64)
        rank[rest] = np.arange(rest.shape[0])
        # noise among off-path vertices follows their index order to stay acyclic
        ok = into_path | (rank[a] < rank[b])
        pairs = set(edges)
        for x, y in zip(a[ok].tolist(), b[ok].tolist()):
            pairs.add((x, y))
        edges = sorted(pairs)
    return Digraph(n, np.array(edges, dtype=np.int64).reshape(-1, 2)), int(path[0]), int(path[-1])


class TournamentTopoSort(StreamEstimator):
    def fit(self, X, y=None):
        return self._store(toposort_tournament(check_stream(X)))


class PlantedDAGTopoSort(StreamEstimator):
    """Dispatching planted-DAG sorter.

    Examples
    --------
    >>> from digraphstream.streamgen import gen_plantdag
    >>> inst = gen_plantdag(64, 0.5, seed=2)
    >>> PlantedDAGTopoSort(q=0.5, random_state=0).fit_predict(inst) == inst.hidden_order
    True
    """

    def __init__(self, q=0.5, c_piv=4.0, c_win=4.0, random_state=None):
        self.q = q
        self.c_piv = c_piv
        self.c_win = c_win
        self.random_state = random_state

    def fit(self, X, y=None):
        n = X.n
        budget = largeq_pass_budget(n) if use_largeq(n, self.q) else 2
        stream = check_stream(X, pass_budget=budget)
        return self._store(toposort_plantdag(stream, self.q, self.c_piv, self.c_win,
                                             check_seed(self.random_state)))


class TransitiveReductionTopoSort(StreamEstimator):
    def __init__(self, random_state=None):
        self.random_state = random_state

    def fit(self, X, y=None):
        stream = check_stream(X, policy="fixed-random-shuffle",
                              seed=check_seed(self.random_state))
        return self._store(transitive_reduction_toposort(stream))


class ShortPathDAG(StreamEstimator):
    _result_attr = "reachable_"

    def __init__(self, p=3, source=0, target=1, random_state=None):
        self.p = p
        self.source = source
        self.target = target
        self.random_state = random_state

    def fit(self, X, y=None):
        stream = check_stream(X, policy="per-pass-random-shuffle", pass_budget=self.p,
                              seed=check_seed(self.random_state))
        self.reachable_ = shortpath_dag_random_order(stream, self.p, self.source, self.target)
        self.meter_ = stream.meter.snapshot()
        return self
