"""Stable graphs: validity, canonical labeling, enumeration, automorphisms.

A stable graph is stored in quotient form: a genus per vertex, a multiset of
edges given as vertex pairs (loops and parallel edges allowed), and a vertex
per numbered leg.  Half-edges are addressed positionally: edge k has sides 0
and 1 attached to edges[k][0] and edges[k][1] respectively.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence


class InvalidGraphError(ValueError):
    pass


_VALENCE_CACHE: dict = {}


@dataclass(frozen=True, eq=True)
class StableGraph:
    """Immutable stable graph; construct through :func:`make_graph` so the
    stored representative is the canonical one of its isomorphism class."""

    genera: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    legs: tuple[int, ...]  # legs[i] = vertex carrying marking i+1

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.genera, self.edges, self.legs))
            object.__setattr__(self, "_hash", h)
        return h

    @property
    def num_vertices(self) -> int:
        return len(self.genera)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def n(self) -> int:
        return len(self.legs)

    def h1(self) -> int:
        return len(self.edges) - len(self.genera) + 1

    def genus(self) -> int:
        return self.h1() + sum(self.genera)

    def valences(self) -> tuple[int, ...]:
        cached = _VALENCE_CACHE.get(self)
        if cached is None:
            val = [0] * len(self.genera)
            for u, w in self.edges:
                val[u] += 1
                val[w] += 1
            for v in self.legs:
                val[v] += 1
            cached = tuple(val)
            _VALENCE_CACHE[self] = cached
        return cached

    def legs_at(self, v: int) -> list[int]:
        return [m for m, vv in enumerate(self.legs, start=1) if vv == v]

    def vertex_capacity(self, v: int) -> int:
        """Decoration degree bound 3g(v) - 3 + n(v) at vertex v."""
        return 3 * self.genera[v] - 3 + self.valences()[v]

    def capacities(self) -> tuple[int, ...]:
        return tuple(
            3 * g - 3 + val for g, val in zip(self.genera, self.valences())
        )

    def is_trivial(self) -> bool:
        return len(self.genera) == 1 and not self.edges

    def sort_key(self):
        return (self.genera, self.edges, self.legs)


def _connected(num_vertices: int, edges: Iterable[tuple[int, int]]) -> bool:
    if num_vertices <= 1:
        return True
    adj = {v: set() for v in range(num_vertices)}
    for u, w in edges:
        adj[u].add(w)
        adj[w].add(u)
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == num_vertices


def validate(graph: StableGraph) -> list[str]:
    """Return the list of violated conditions (empty when the graph is valid)."""
    problems = []
    V = len(graph.genera)
    if V == 0:
        return ["graph has no vertices"]
    if any(g < 0 for g in graph.genera):
        problems.append("negative vertex genus")
    for u, w in graph.edges:
        if not (0 <= u < V and 0 <= w < V):
            problems.append(f"edge endpoint out of range: ({u},{w})")
    for m, v in enumerate(graph.legs, start=1):
        if not (0 <= v < V):
            problems.append(f"leg {m} attached to missing vertex {v}")
    if problems:
        return problems
    if not _connected(V, graph.edges):
        problems.append("graph is not connected")
    val = graph.valences()
    for v in range(V):
        if 2 * graph.genera[v] - 2 + val[v] <= 0:
            problems.append(
                f"vertex {v} unstable: 2g-2+n = {2 * graph.genera[v] - 2 + val[v]}"
            )
    return problems


def _vertex_classes(genera, edges, legs):
    """Group vertices by an isomorphism-invariant signature; the canonical
    order sorts classes by signature and only permutes within a class."""
    V = len(genera)
    deg = [0] * V
    loops = [0] * V
    for u, w in edges:
        if u == w:
            loops[u] += 1
            deg[u] += 2
        else:
            deg[u] += 1
            deg[w] += 1
    marking_sets = [[] for _ in range(V)]
    for m, v in enumerate(legs, start=1):
        marking_sets[v].append(m)
    sig = [
        (genera[v], deg[v] + len(marking_sets[v]), loops[v], tuple(marking_sets[v]))
        for v in range(V)
    ]
    classes = {}
    for v in range(V):
        classes.setdefault(sig[v], []).append(v)
    ordered = sorted(classes.items())
    return ordered


def _iter_candidate_perms(genera, edges, legs):
    """Yield vertex permutations old->new compatible with the class order."""
    ordered = _vertex_classes(genera, edges, legs)
    blocks = [members for _, members in ordered]
    starts = []
    base = 0
    for members in blocks:
        starts.append(base)
        base += len(members)
    for choice in itertools.product(*(itertools.permutations(b) for b in blocks)):
        perm = [0] * len(genera)
        for block_idx, arranged in enumerate(choice):
            for offset, old_v in enumerate(arranged):
                perm[old_v] = starts[block_idx] + offset
        yield tuple(perm)


def _apply_perm(perm, genera, edges, legs):
    V = len(genera)
    new_genera = [0] * V
    for v in range(V):
        new_genera[perm[v]] = genera[v]
    new_edges = sorted(tuple(sorted((perm[u], perm[w]))) for u, w in edges)
    new_legs = tuple(perm[v] for v in legs)
    return tuple(new_genera), tuple(new_edges), new_legs


def canonical_data(genera, edges, legs):
    """Canonical (genera, edges, legs) for the isomorphism class."""
    best = None
    for perm in _iter_candidate_perms(genera, edges, legs):
        key = _apply_perm(perm, genera, edges, legs)
        if best is None or key < best:
            best = key
    return best


def make_graph(genera, edges, legs, check: bool = True) -> StableGraph:
    """Build the canonical :class:`StableGraph` for the given data."""
    genera = tuple(genera)
    edges = tuple(tuple(sorted(e)) for e in edges)
    legs = tuple(legs)
    g2, e2, l2 = canonical_data(genera, edges, legs)
    graph = StableGraph(g2, e2, l2)
    if check:
        problems = validate(graph)
        if problems:
            raise InvalidGraphError("; ".join(problems))
    return graph


def canonical_form(graph: StableGraph) -> tuple:
    """Relabel-invariant key identifying the isomorphism class."""
    return canonical_data(graph.genera, graph.edges, graph.legs)


def canonical_labeling(genera, edges, legs):
    """The canonical key together with a vertex relabeling achieving it."""
    best = None
    best_perm = None
    for perm in _iter_candidate_perms(genera, edges, legs):
        key = _apply_perm(perm, genera, edges, legs)
        if best is None or key < best:
            best, best_perm = key, perm
    return best, best_perm


_AUT_CACHE: dict[StableGraph, tuple[tuple[int, ...], ...]] = {}


def vertex_automorphisms(graph: StableGraph) -> tuple[tuple[int, ...], ...]:
    """All vertex permutations fixing genera, legs and the edge multiset.

    The graph must be canonical (as produced by :func:`make_graph`).
    """
    cached = _AUT_CACHE.get(graph)
    if cached is not None:
        return cached
    own = (graph.genera, graph.edges, graph.legs)
    auts = tuple(
        perm
        for perm in _iter_candidate_perms(*own)
        if _apply_perm(perm, *own) == own
    )
    _AUT_CACHE[graph] = auts
    return auts


def automorphism_count(graph: StableGraph) -> int:
    """Order of the automorphism group (vertex and half-edge permutations
    commuting with the genus, vertex, involution and marking maps).

    For a fixed compatible vertex permutation the half-edge extensions are
    counted directly: parallel edges between each vertex pair permute freely,
    loops permute freely, and each loop's two half-edges can swap.
    """
    problems = validate(graph)
    if problems:
        raise InvalidGraphError("; ".join(problems))
    graph = make_graph(graph.genera, graph.edges, graph.legs)
    count = len(vertex_automorphisms(graph))
    mult: dict[tuple[int, int], int] = {}
    loops = 0
    for u, w in graph.edges:
        if u == w:
            loops += 1
        mult[(u, w)] = mult.get((u, w), 0) + 1
    from .numerics import factorial

    for m in mult.values():
        count *= factorial(m)
    count *= 2**loops
    return count


def half_edge_automorphisms(graph: StableGraph):
    """Automorphisms at half-edge resolution.

    Each is (vertex_perm, edge_map) with edge_map[k] = (image edge, flip),
    flip meaning side 0 of edge k lands on side 1 of the image.
    """
    result = []
    groups: dict[tuple[int, int], list[int]] = {}
    for k, (u, w) in enumerate(graph.edges):
        groups.setdefault((u, w), []).append(k)
    for vperm in vertex_automorphisms(graph):
        # image of each group under vperm, as a sorted pair
        group_items = sorted(groups.items())
        target_lists = []
        for (u, w), members in group_items:
            tu, tw = sorted((vperm[u], vperm[w]))
            target_lists.append((members, groups[(tu, tw)], u == w))
        choices_per_group = []
        for members, targets, is_loop in target_lists:
            perms = list(itertools.permutations(targets))
            if is_loop:
                flips = list(itertools.product((False, True), repeat=len(members)))
            else:
                flips = [tuple(False for _ in members)]
            choices_per_group.append(
                [(p, f) for p in perms for f in flips]
            )
        for combo in itertools.product(*choices_per_group):
            edge_map: dict[int, tuple[int, bool]] = {}
            for (members, targets, is_loop), (p, f) in zip(target_lists, combo):
                for src, dst, flip in zip(members, p, f):
                    u, w = graph.edges[src]
                    tu, tw = graph.edges[dst]
                    if is_loop:
                        edge_map[src] = (dst, flip)
                    else:
                        # side 0 of src sits at u; it must land at vperm[u]
                        edge_map[src] = (dst, tu != vperm[u])
            result.append((vperm, tuple(edge_map[k] for k in range(len(graph.edges)))))
    return result


def contract_edge(graph: StableGraph, edge_index: int) -> StableGraph:
    """Contract one edge: merge endpoints (genera add) or, for a loop,
    remove it and raise the vertex genus by one."""
    if not (0 <= edge_index < len(graph.edges)):
        raise IndexError(f"no edge {edge_index}")
    u, w = graph.edges[edge_index]
    genera = list(graph.genera)
    rest = [e for k, e in enumerate(graph.edges) if k != edge_index]
    if u == w:
        genera[u] += 1
        edges = rest
        legs = graph.legs
    else:
        # merge w into u, then drop w
        genera[u] += genera[w]

        def move(v):
            if v == w:
                v = u
            return v - 1 if v > w else v

        edges = [tuple(sorted((move(a), move(b)))) for a, b in rest]
        legs = tuple(move(v) for v in graph.legs)
        del genera[w]
    out = make_graph(genera, edges, legs, check=False)
    problems = validate(out)
    if problems:
        raise InvalidGraphError("contraction produced an invalid graph: " + "; ".join(problems))
    return out


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _leg_assignments(markings: Sequence[int], counts: Sequence[int]) -> Iterator[dict[int, int]]:
    """All assignments of the given markings to vertices with the given counts."""
    if not markings:
        yield {}
        return
    markings = list(markings)

    def rec(remaining: tuple[int, ...], counts_left: list[int], acc: dict[int, int]):
        if not remaining:
            yield dict(acc)
            return
        m = remaining[0]
        for v, c in enumerate(counts_left):
            if c > 0:
                counts_left[v] -= 1
                acc[m] = v
                yield from rec(remaining[1:], counts_left, acc)
                del acc[m]
                counts_left[v] += 1

    yield from rec(tuple(markings), list(counts), {})


_ENUM_CACHE: dict[tuple[int, int, int], tuple[StableGraph, ...]] = {}


def enumerate_stable_graphs(g: int, n: int, max_edges: int | None = None) -> tuple[StableGraph, ...]:
    """All stable graphs of genus g with n legs, one per isomorphism class,
    optionally restricted to at most ``max_edges`` edges.

    Generation is by edge count, vertex count, labeled multigraph shape,
    genus composition and leg distribution, deduplicated by canonical form.
    """
    if 2 * g - 2 + n <= 0:
        raise InvalidGraphError(f"({g},{n}) is unstable")
    cap = 3 * g - 3 + n
    emax = cap if max_edges is None else min(max_edges, cap)
    key = (g, n, emax)
    cached = _ENUM_CACHE.get(key)
    if cached is not None:
        return cached

    seen: set[tuple] = set()
    out: list[StableGraph] = []
    for E in range(emax + 1):
        for V in range(1, E + 2):
            h1 = E - V + 1
            if h1 < 0 or h1 > g:
                continue
            gsum = g - h1
            pair_types = [
                (u, w) for u in range(V) for w in range(u, V)
            ]
            for edge_multiset in itertools.combinations_with_replacement(pair_types, E):
                if not _connected(V, edge_multiset):
                    continue
                deg = [0] * V
                for u, w in edge_multiset:
                    deg[u] += 1
                    deg[w] += 1
                for genera in _compositions(gsum, V):
                    # minimum legs needed at each vertex for stability
                    need = [
                        max(0, 1 - (2 * genera[v] - 2 + deg[v]))
                        for v in range(V)
                    ]
                    if sum(need) > n:
                        continue
                    for counts in _compositions(n - sum(need), V):
                        full = [counts[v] + need[v] for v in range(V)]
                        ok = all(
                            2 * genera[v] - 2 + deg[v] + full[v] > 0 for v in range(V)
                        )
                        if not ok:
                            continue
                        for assignment in _leg_assignments(range(1, n + 1), full):
                            legs = tuple(assignment[m] for m in range(1, n + 1))
                            data = canonical_data(genera, edge_multiset, legs)
                            if data in seen:
                                continue
                            seen.add(data)
                            out.append(StableGraph(*data))
    out.sort(key=lambda gr: gr.sort_key())
    result = tuple(out)
    _ENUM_CACHE[key] = result
    return result


def graph_to_json(graph: StableGraph) -> dict:
    return {
        "genus": graph.genus(),
        "n": graph.n,
        "vertices": [{"genus": gv} for gv in graph.genera],
        "edges": [[u, w] for u, w in graph.edges],
        "legs": [
            {"marking": m, "vertex": v} for m, v in enumerate(graph.legs, start=1)
        ],
    }


def graph_from_json(data: dict) -> StableGraph:
    genera = [v["genus"] for v in data["vertices"]]
    edges = [tuple(e) for e in data["edges"]]
    legs_sorted = sorted(data["legs"], key=lambda rec: rec["marking"])
    legs = [rec["vertex"] for rec in legs_sorted]
    return make_graph(genera, edges, legs)
