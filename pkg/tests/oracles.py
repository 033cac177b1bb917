"""Slow, obviously-correct reference implementations used by the tests.

Nothing here shares code with the package beyond the basic containers.
"""

import itertools
import math

import numpy as np

from digraphstream.graphcore import Ordering, Tournament


def adjacency_sets(n, edges):
    succ = {v: set() for v in range(n)}
    for u, v in edges:
        succ[int(u)].add(int(v))
    return succ


def back_edges_naive(edges, order):
    pos = {v: i for i, v in enumerate(order)}
    return sum(1 for u, v in edges if pos[v] < pos[u])


def kendall_naive(a, b):
    pa = {v: i for i, v in enumerate(a)}
    pb = {v: i for i, v in enumerate(b)}
    n = len(a)
    return sum(1 for x in range(n) for y in range(x + 1, n)
               if (pa[x] < pa[y]) != (pb[x] < pb[y]))


def brute_min_fas(t: Tournament):
    """Minimum back-edge count by enumerating all n! orderings."""
    edges = [tuple(e) for e in t.edges().tolist()]
    return min(back_edges_naive(edges, p) for p in itertools.permutations(range(t.n)))


def has_cycle_dfs(n, edges):
    """Iterative three-colour DFS."""
    succ = adjacency_sets(n, edges)
    colour = [0] * n
    for root in range(n):
        if colour[root]:
            continue
        stack = [(root, iter(succ[root]))]
        colour[root] = 1
        while stack:
            v, it = stack[-1]
            for w in it:
                if colour[w] == 1:
                    return True
                if colour[w] == 0:
                    colour[w] = 1
                    stack.append((w, iter(succ[w])))
                    break
            else:
                colour[v] = 2
                stack.pop()
    return False


def reachable(n, edges, s, t, skip=None):
    """BFS reachability from s to t, optionally ignoring one edge."""
    succ = adjacency_sets(n, [e for e in edges if tuple(e) != skip])
    seen = {s}
    frontier = [s]
    while frontier:
        nxt = []
        for v in frontier:
            for w in succ[v]:
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return t in seen


def has_alternate_path(n, edges, u, v):
    """Is there a u->v path of length >= 2 avoiding the direct edge?"""
    return reachable(n, edges, u, v, skip=(u, v))


def shortest_path_len(n, edges, s, t):
    succ = adjacency_sets(n, edges)
    dist = {s: 0}
    frontier = [s]
    while frontier:
        nxt = []
        for v in frontier:
            for w in succ[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    nxt.append(w)
        frontier = nxt
    return dist.get(t)


def aggr_cost_naive(pi, sigmas):
    return sum(kendall_naive(list(pi), list(s)) for s in sigmas)


def rank_aggr_brute(sigmas):
    """Kemeny optimum over all n! candidates (first minimizer in lexicographic order)."""
    n = len(sigmas[0])
    best, best_cost = None, None
    for perm in itertools.permutations(range(n)):
        c = aggr_cost_naive(perm, sigmas)
        if best_cost is None or c < best_cost:
            best, best_cost = perm, c
    return Ordering(best), best_cost


def all_tournaments(n):
    """Every tournament on n vertices (2^C(n,2) of them)."""
    N = n * (n - 1) // 2
    for bits in range(1 << N):
        orient = np.array([(bits >> i) & 1 for i in range(N)], dtype=bool)
        yield Tournament(n, orient)


def mahonian_pmf(n):
    """Distribution of the inversion count of a uniform permutation of n items."""
    pmf = np.array([1.0])
    for j in range(1, n + 1):
        pmf = np.convolve(pmf, np.ones(j)) / j
    return pmf


def window_violation_prob_dyes(n, eps):
    """P(|B| outside ((1-eps)m, (1+eps)m)) when T ~ D_yes and sigma is fixed."""
    m = n * (n - 1) / 4
    pmf = mahonian_pmf(n)
    b = np.arange(pmf.shape[0])
    inside = (b > (1 - eps) * m) & (b < (1 + eps) * m)
    return float(pmf[~inside].sum())


def window_violation_prob_dno(n, eps):
    """Same window for T ~ D_no: |B| ~ Binomial(C(n,2), 1/2)."""
    N = n * (n - 1) // 2
    m = N / 2
    logp = [math.lgamma(N + 1) - math.lgamma(b + 1) - math.lgamma(N - b + 1) - N * math.log(2)
            for b in range(N + 1)]
    return float(sum(math.exp(lp) for b, lp in enumerate(logp)
                     if not ((1 - eps) * m < b < (1 + eps) * m)))
