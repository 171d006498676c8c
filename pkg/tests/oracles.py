"""Independent brute-force oracles used to pin expected values.

These deliberately avoid the library's canonical-form machinery: isomorphism
is decided by explicit search over vertex bijections, and automorphisms are
counted over explicit half-edge permutations.
"""
from __future__ import annotations

import itertools
from fractions import Fraction


def graphs_isomorphic(a, b) -> bool:
    """a, b are (genera, edges, legs) triples; explicit bijection search."""
    genera_a, edges_a, legs_a = a
    genera_b, edges_b, legs_b = b
    if len(genera_a) != len(genera_b) or len(edges_a) != len(edges_b):
        return False
    if len(legs_a) != len(legs_b):
        return False
    V = len(genera_a)
    for perm in itertools.permutations(range(V)):
        if any(genera_b[perm[v]] != genera_a[v] for v in range(V)):
            continue
        if any(perm[va] != vb for va, vb in zip(legs_a, legs_b)):
            continue
        image = sorted(tuple(sorted((perm[u], perm[w]))) for u, w in edges_a)
        if image == sorted(tuple(sorted(e)) for e in edges_b):
            return True
    return False


def _connected(V, edges):
    if V <= 1:
        return True
    adj = {v: set() for v in range(V)}
    for u, w in edges:
        adj[u].add(w)
        adj[w].add(u)
    seen, stack = {0}, [0]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == V


def brute_force_stable_graphs(g, n, max_edges=None):
    """Generate-and-filter enumeration with pairwise isomorphism dedup."""
    cap = 3 * g - 3 + n
    emax = cap if max_edges is None else min(max_edges, cap)
    found = []
    for E in range(emax + 1):
        for V in range(1, E + 2):
            pair_types = [(u, w) for u in range(V) for w in range(u, V)]
            for edges in itertools.combinations_with_replacement(pair_types, E):
                if not _connected(V, edges):
                    continue
                h1 = E - V + 1
                if h1 < 0 or h1 > g:
                    continue
                for genera in itertools.product(range(g + 1), repeat=V):
                    if sum(genera) + h1 != g:
                        continue
                    for legs in itertools.product(range(V), repeat=n):
                        val = [0] * V
                        for u, w in edges:
                            val[u] += 1
                            val[w] += 1
                        for v in legs:
                            val[v] += 1
                        if any(2 * genera[v] - 2 + val[v] <= 0 for v in range(V)):
                            continue
                        cand = (tuple(genera), tuple(edges), tuple(legs))
                        if not any(graphs_isomorphic(cand, old) for old in found):
                            found.append(cand)
    return found


def brute_force_automorphisms(genera, edges, legs) -> int:
    """Count (vertex, half-edge) permutation pairs commuting with the genus,
    vertex, involution and marking maps, by direct enumeration."""
    V = len(genera)
    E = len(edges)
    # legs are individually marked, so an automorphism fixes their vertices;
    # each edge maps to an edge with matching endpoints, possibly side-swapped
    count = 0
    for vperm in itertools.permutations(range(V)):
        if any(genera[vperm[v]] != genera[v] for v in range(V)):
            continue
        if any(vperm[v] != v for v in legs):
            continue
        for eperm in itertools.permutations(range(E)):
            ways = 1
            for k in range(E):
                u, w = edges[k]
                tu, tw = edges[eperm[k]]
                opts = 0
                if (vperm[u], vperm[w]) == (tu, tw):
                    opts += 1
                if (vperm[u], vperm[w]) == (tw, tu):
                    opts += 1
                ways *= opts
                if ways == 0:
                    break
            count += ways
    return count


def pascal_binomial(a, b):
    """Binomial via Pascal's rule with memoization; generalized to negative
    upper index through the reflection identity."""
    memo = {}

    def rec(x, y):
        if y < 0:
            return 0
        if y == 0:
            return 1
        if x >= 0 and y > x:
            return 0
        if (x, y) in memo:
            return memo[(x, y)]
        if x < 0:
            val = (-1) ** y * rec(y - x - 1, y)
        else:
            val = rec(x - 1, y - 1) + rec(x - 1, y)
        memo[(x, y)] = val
        return val

    return rec(a, b)
