"""The strata algebra: decorated stable graphs with excess intersection product.

Elements are finite rational-linear combinations of decorated graphs [Gamma,
gamma], where gamma assigns kappa exponents to vertices and psi exponents to
half-edges and legs, subject to the per-vertex degree condition
d(gamma_v) <= 3g(v) - 3 + n(v).  Decorated graphs are stored canonically so
that term maps merge isomorphic terms.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .numerics import factorial, rational_str, parse_rational
from .stablegraphs import (
    InvalidGraphError,
    StableGraph,
    enumerate_stable_graphs,
    graph_from_json,
    graph_to_json,
    half_edge_automorphisms,
    make_graph,
    vertex_automorphisms,
    _iter_candidate_perms,
)


@dataclass(frozen=True, eq=True)
class DecoratedGraph:
    """Canonical decorated stable graph.  Use :func:`make_decorated`."""

    graph: StableGraph
    psi_legs: tuple[int, ...]                    # exponent per marking
    psi_edges: tuple[tuple[int, int], ...]       # (side0, side1) per edge
    kappa: tuple[tuple[tuple[int, int], ...], ...]  # per vertex, sorted (index, exp)

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.graph, self.psi_legs, self.psi_edges, self.kappa))
            object.__setattr__(self, "_hash", h)
        return h

    def degree(self) -> int:
        d = self.graph.num_edges + sum(self.psi_legs)
        d += sum(a + b for a, b in self.psi_edges)
        d += sum(i * x for vk in self.kappa for i, x in vk)
        return d

    def has_kappa(self) -> bool:
        return any(self.kappa)

    def vertex_decoration_degree(self, v: int) -> int:
        d = sum(i * x for i, x in self.kappa[v])
        for m, vv in enumerate(self.graph.legs):
            if vv == v:
                d += self.psi_legs[m]
        for k, (u, w) in enumerate(self.graph.edges):
            if u == v:
                d += self.psi_edges[k][0]
            if w == v:
                d += self.psi_edges[k][1]
        return d

    def violates_degree_condition(self) -> bool:
        caps = [self.graph.vertex_capacity(v) for v in range(self.graph.num_vertices)]
        return any(
            self.vertex_decoration_degree(v) > caps[v]
            for v in range(self.graph.num_vertices)
        )

    def sort_key(self):
        return (
            self.degree(),
            self.graph.sort_key(),
            self.psi_legs,
            self.psi_edges,
            self.kappa,
        )


def _decorated_key(perm, genera, edges, legs, psi_legs, psi_edges, kappa):
    V = len(genera)
    new_genera = [0] * V
    new_kappa = [()] * V
    for v in range(V):
        new_genera[perm[v]] = genera[v]
        new_kappa[perm[v]] = tuple(sorted(kappa[v]))
    recs = []
    for k, (u, w) in enumerate(edges):
        nu, nw = perm[u], perm[w]
        p0, p1 = psi_edges[k]
        if nu > nw:
            nu, nw, p0, p1 = nw, nu, p1, p0
        elif nu == nw:
            p0, p1 = max(p0, p1), min(p0, p1)
        recs.append(((nu, nw), (p0, p1)))
    recs.sort()
    new_legs = tuple(perm[v] for v in legs)
    return (
        tuple(new_genera),
        tuple(r[0] for r in recs),
        new_legs,
        tuple(psi_legs),
        tuple(r[1] for r in recs),
        tuple(new_kappa),
    )


def make_decorated(genera, edges, legs, psi_legs, psi_edges, kappa) -> DecoratedGraph:
    """Canonicalize a decorated graph (graph part first, then decorations)."""
    genera = tuple(genera)
    edges = tuple(tuple(e) for e in edges)
    legs = tuple(legs)
    psi_edges = tuple(tuple(p) for p in psi_edges)
    kappa = tuple(tuple(sorted((i, x) for i, x in vk if x)) for vk in kappa)
    best = None
    for perm in _iter_candidate_perms(genera, edges, legs):
        key = _decorated_key(perm, genera, edges, legs, psi_legs, psi_edges, kappa)
        if best is None or key < best:
            best = key
    g2, e2, l2, pl2, pe2, k2 = best
    return DecoratedGraph(StableGraph(g2, e2, l2), pl2, pe2, k2)


def decorate_canonical_graph(graph: StableGraph, psi_legs, psi_edges, kappa) -> DecoratedGraph:
    """Fast path when the underlying graph is already canonical: only its
    automorphisms can improve the decoration key."""
    best = None
    data = (graph.genera, graph.edges, graph.legs)
    psi_edges = tuple(tuple(p) for p in psi_edges)
    kappa = tuple(tuple(sorted((i, x) for i, x in vk if x)) for vk in kappa)
    for perm in vertex_automorphisms(graph):
        key = _decorated_key(perm, *data, psi_legs, psi_edges, kappa)
        if best is None or key < best:
            best = key
    g2, e2, l2, pl2, pe2, k2 = best
    return DecoratedGraph(StableGraph(g2, e2, l2), pl2, pe2, k2)


def _empty_decoration(graph: StableGraph):
    return (
        (0,) * graph.n,
        tuple((0, 0) for _ in graph.edges),
        tuple(() for _ in graph.genera),
    )


class StrataElement:
    """Finite formal sum of decorated graphs with rational coefficients."""

    __slots__ = ("g", "n", "terms", "kappa_from_forgotten_psi")

    def __init__(self, g: int, n: int, terms=None):
        self.g = g
        self.n = n
        self.terms: dict[DecoratedGraph, Fraction] = {}
        for dg, c in (terms or {}).items():
            c = Fraction(c)
            if c != 0:
                self.terms[dg] = c
        self.kappa_from_forgotten_psi = False

    # --- constructors -------------------------------------------------
    @classmethod
    def zero(cls, g, n):
        return cls(g, n)

    @classmethod
    def unit(cls, g, n):
        graph = make_graph([g], [], [0] * n)
        dg = DecoratedGraph(graph, *_empty_decoration(graph))
        return cls(g, n, {dg: Fraction(1)})

    @classmethod
    def psi_monomial(cls, g, n, exponents: dict[int, int]):
        """Monomial in psi classes on the trivial one-vertex graph."""
        graph = make_graph([g], [], [0] * n)
        psi_legs = tuple(exponents.get(m, 0) for m in range(1, n + 1))
        dg = DecoratedGraph(graph, psi_legs, (), tuple(() for _ in graph.genera))
        el = cls(g, n, {dg: Fraction(1)})
        if dg.violates_degree_condition():
            return cls.zero(g, n)
        return el

    # --- linear structure ----------------------------------------------
    def _check_ambient(self, other):
        if (self.g, self.n) != (other.g, other.n):
            raise ValueError("ambient (g, n) mismatch")

    def __add__(self, other):
        self._check_ambient(other)
        terms = dict(self.terms)
        for dg, c in other.terms.items():
            terms[dg] = terms.get(dg, Fraction(0)) + c
        return StrataElement(self.g, self.n, terms)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "StrataElement":
        c = Fraction(c)
        return StrataElement(self.g, self.n, {dg: c * v for dg, v in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, StrataElement):
            return NotImplemented
        return (self.g, self.n) == (other.g, other.n) and self.terms == other.terms

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self):
        if not self.terms:
            return f"StrataElement({self.g},{self.n}; 0)"
        bits = [
            f"{rational_str(c)}*[{dg.graph.genera}|E{dg.graph.edges}|psi{dg.psi_legs}{dg.psi_edges}|k{dg.kappa}]"
            for dg, c in sorted(self.terms.items(), key=lambda t: t[0].sort_key())
        ]
        return f"StrataElement({self.g},{self.n}; " + " + ".join(bits) + ")"

    # --- queries ---------------------------------------------------------
    def degree_component(self, d: int) -> "StrataElement":
        return StrataElement(
            self.g, self.n, {dg: c for dg, c in self.terms.items() if dg.degree() == d}
        )

    def psi_degree(self, marking: int) -> int:
        return max((dg.psi_legs[marking - 1] for dg in self.terms), default=0)

    def is_kappa_free_boundary(self) -> bool:
        return all(
            dg.graph.num_edges >= 1 and not dg.has_kappa() for dg in self.terms
        )

    def has_kappa(self) -> bool:
        return any(dg.has_kappa() for dg in self.terms)

    def graph_component(self, graph: StableGraph) -> "StrataElement":
        return StrataElement(
            self.g, self.n, {dg: c for dg, c in self.terms.items() if dg.graph == graph}
        )

    def relabel_legs(self, perm: dict[int, int]) -> "StrataElement":
        """Apply a marking permutation (old marking -> new marking)."""
        full = {m: perm.get(m, m) for m in range(1, self.n + 1)}
        if sorted(full.values()) != list(range(1, self.n + 1)):
            raise ValueError("not a permutation of the markings")
        out: dict[DecoratedGraph, Fraction] = {}
        for dg, c in self.terms.items():
            legs = [0] * self.n
            psis = [0] * self.n
            for m in range(1, self.n + 1):
                legs[full[m] - 1] = dg.graph.legs[m - 1]
                psis[full[m] - 1] = dg.psi_legs[m - 1]
            new = make_decorated(
                dg.graph.genera, dg.graph.edges, legs, tuple(psis), dg.psi_edges, dg.kappa
            )
            out[new] = out.get(new, Fraction(0)) + c
        return StrataElement(self.g, self.n, out)

    # --- serialization ----------------------------------------------------
    def to_json(self) -> list:
        records = []
        for dg, coeff in sorted(self.terms.items(), key=lambda t: t[0].sort_key()):
            n = dg.graph.n
            kappa = [
                [v, i, x]
                for v, vk in enumerate(dg.kappa)
                for i, x in vk
            ]
            psi = [[m, e] for m, e in enumerate(dg.psi_legs, start=1) if e]
            for k, (a, b) in enumerate(dg.psi_edges):
                # half-edge ids: side s of edge k is n + 2k + s + 1
                if a:
                    psi.append([n + 2 * k + 1, a])
                if b:
                    psi.append([n + 2 * k + 2, b])
            records.append(
                {
                    "graph": graph_to_json(dg.graph),
                    "kappa": kappa,
                    "psi": psi,
                    "coeff": rational_str(coeff),
                }
            )
        return records

    @classmethod
    def from_json(cls, g: int, n: int, records: list) -> "StrataElement":
        terms: dict[DecoratedGraph, Fraction] = {}
        for rec in records:
            graph = graph_from_json(rec["graph"])
            psi_legs = [0] * n
            psi_edges = [[0, 0] for _ in graph.edges]
            for ident, e in rec["psi"]:
                if ident <= n:
                    psi_legs[ident - 1] = e
                else:
                    k, s = divmod(ident - n - 1, 2)
                    psi_edges[k][s] = e
            kappa = [dict() for _ in graph.genera]
            for v, i, x in rec["kappa"]:
                kappa[v][i] = kappa[v].get(i, 0) + x
            dg = make_decorated(
                graph.genera,
                graph.edges,
                graph.legs,
                tuple(psi_legs),
                tuple(tuple(p) for p in psi_edges),
                tuple(tuple(sorted(d.items())) for d in kappa),
            )
            terms[dg] = terms.get(dg, Fraction(0)) + parse_rational(rec["coeff"])
        return cls(g, n, terms)


# ----------------------------------------------------------------------
# product
# ----------------------------------------------------------------------

def _contract_info(graph: StableGraph, keep: tuple[int, ...]):
    """Contract all edges outside ``keep``; return component data."""
    V = graph.num_vertices
    parent = list(range(V))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    keep_set = set(keep)
    internal = [k for k in range(graph.num_edges) if k not in keep_set]
    for k in internal:
        u, w = graph.edges[k]
        ru, rw = find(u), find(w)
        if ru != rw:
            parent[ru] = rw
    comps: dict[int, list[int]] = {}
    for v in range(V):
        comps.setdefault(find(v), []).append(v)
    ordered = sorted(comps.values(), key=min)
    vmap = [0] * V
    for ci, members in enumerate(ordered):
        for v in members:
            vmap[v] = ci
    genera = []
    for members in ordered:
        ne = sum(1 for k in internal if vmap[graph.edges[k][0]] == vmap[members[0]])
        genera.append(sum(graph.genera[v] for v in members) + ne - (len(members) - 1))
    edges = [(k, vmap[graph.edges[k][0]], vmap[graph.edges[k][1]]) for k in sorted(keep)]
    legs = tuple(vmap[v] for v in graph.legs)
    return tuple(genera), edges, legs, vmap, tuple(ordered[i] for i in range(len(ordered)))


def _structures(graph: StableGraph, keep: tuple[int, ...], target: StableGraph):
    """Half-edge-level isomorphisms from graph/(contract non-keep) onto target.

    Each structure is (edge_assign, vertex_sets): edge_assign[t] = (edge of
    graph realizing target edge t, flip), vertex_sets[tv] = frozenset of graph
    vertices collapsing onto target vertex tv.
    """
    genera, cedges, legs, vmap, members = _contract_info(graph, keep)
    Vc = len(genera)
    if Vc != target.num_vertices or len(cedges) != target.num_edges:
        return []
    if sorted(genera) != sorted(target.genera):
        return []
    # candidate vertex bijections: must match genus and leg markings exactly
    marking_sets = [frozenset() for _ in range(Vc)]
    tmp: dict[int, set] = {v: set() for v in range(Vc)}
    for m, v in enumerate(legs, start=1):
        tmp[v].add(m)
    marking_sets = [frozenset(tmp[v]) for v in range(Vc)]
    t_tmp: dict[int, set] = {v: set() for v in range(target.num_vertices)}
    for m, v in enumerate(target.legs, start=1):
        t_tmp[v].add(m)
    t_marking_sets = [frozenset(t_tmp[v]) for v in range(target.num_vertices)]

    cand = []
    for v in range(Vc):
        opts = [
            tv
            for tv in range(target.num_vertices)
            if target.genera[tv] == genera[v] and t_marking_sets[tv] == marking_sets[v]
        ]
        if not opts:
            return []
        cand.append(opts)

    out = []
    t_groups: dict[tuple[int, int], list[int]] = {}
    for t, (tu, tw) in enumerate(target.edges):
        t_groups.setdefault((tu, tw), []).append(t)
    for phi in itertools.product(*cand):
        if len(set(phi)) != Vc:
            continue
        groups: dict[tuple[int, int], list[tuple[int, int, int]]] = {}
        ok = True
        for k, cu, cw in cedges:
            pu, pw = sorted((phi[cu], phi[cw]))
            groups.setdefault((pu, pw), []).append((k, cu, cw))
        if set(groups) != set(t_groups) or any(
            len(groups[p]) != len(t_groups[p]) for p in groups
        ):
            continue
        group_list = sorted(groups.items())
        per_group = []
        for pair, members_here in group_list:
            targets = t_groups[pair]
            is_loop = pair[0] == pair[1]
            arrangements = []
            for tperm in itertools.permutations(targets):
                if is_loop:
                    for flips in itertools.product((False, True), repeat=len(members_here)):
                        arrangements.append((tperm, flips))
                else:
                    flips = []
                    for (k, cu, cw), t in zip(members_here, tperm):
                        tu, tw = target.edges[t]
                        flips.append(phi[cu] != tu)
                    arrangements.append((tperm, tuple(flips)))
            per_group.append((members_here, arrangements))
        for combo in itertools.product(*(arr for _, arr in per_group)):
            edge_assign: dict[int, tuple[int, bool]] = {}
            for (members_here, _), (tperm, flips) in zip(per_group, combo):
                for (k, cu, cw), t, flip in zip(members_here, tperm, flips):
                    edge_assign[t] = (k, flip)
            vertex_sets = [()] * target.num_vertices
            for v in range(Vc):
                vertex_sets[phi[v]] = tuple(sorted(members[v]))
            out.append(
                (
                    tuple(edge_assign[t] for t in range(target.num_edges)),
                    tuple(vertex_sets),
                )
            )
    return out


def _act_structure(aut, structure):
    vperm, emap = aut
    edge_assign, vertex_sets = structure
    new_assign = tuple(
        (emap[k][0], flip ^ emap[k][1]) for k, flip in edge_assign
    )
    new_sets = tuple(tuple(sorted(vperm[v] for v in s)) for s in vertex_sets)
    return (new_assign, new_sets)


def _kappa_transfer_options(dg: DecoratedGraph, vertex_sets):
    """Distribute each kappa decoration over the vertices it pulls back to.

    kappa_d on a vertex that splits into a component becomes the sum of
    kappa_d over the component's vertices; powers expand multinomially.
    """
    options = [({}, Fraction(1))]
    for tv, vk in enumerate(dg.kappa):
        comp = sorted(vertex_sets[tv])
        for index, power in vk:
            if len(comp) == 1:
                new_options = []
                for assign, coeff in options:
                    a2 = {k: dict(v) for k, v in assign.items()}
                    a2.setdefault(comp[0], {})
                    a2[comp[0]][index] = a2[comp[0]].get(index, 0) + power
                    new_options.append((a2, coeff))
                options = new_options
            else:
                new_options = []
                for split in _compositions_fixed(power, len(comp)):
                    mult = factorial(power)
                    for part in split:
                        mult //= factorial(part)
                    for assign, coeff in options:
                        a2 = {k: dict(v) for k, v in assign.items()}
                        for v, part in zip(comp, split):
                            if part:
                                a2.setdefault(v, {})
                                a2[v][index] = a2[v].get(index, 0) + part
                        new_options.append((a2, coeff * mult))
                options = new_options
    return options


def _compositions_fixed(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions_fixed(total - first, parts - 1):
            yield (first,) + rest


def product_terms(dg1: DecoratedGraph, dg2: DecoratedGraph, g: int, n: int, truncate: bool = True):
    """Terms of [Gamma1,gamma1]*[Gamma2,gamma2], one per isomorphism class of
    common degeneration with contraction structures onto both factors.

    The enumeration realizes the fiber product: candidate graphs Gamma carry a
    pair of edge subsets S1 union S2 = E(Gamma) together with half-edge
    isomorphisms of the respective contractions onto the factors, counted up
    to simultaneous automorphism of Gamma; an excess factor -(psi_h + psi_h')
    appears for every edge in S1 intersect S2.
    """
    E1, E2 = dg1.graph.num_edges, dg2.graph.num_edges
    cap = 3 * g - 3 + n
    out: list[tuple[DecoratedGraph, Fraction]] = []
    for G in enumerate_stable_graphs(g, n, max_edges=min(E1 + E2, cap)):
        E = G.num_edges
        if E < max(E1, E2):
            continue
        auts = half_edge_automorphisms(G)
        idx = tuple(range(E))
        str_cache1 = {}
        str_cache2 = {}
        seen = set()
        for S1 in itertools.combinations(idx, E1):
            st1 = str_cache1.get(S1)
            if st1 is None:
                st1 = _structures(G, S1, dg1.graph)
                str_cache1[S1] = st1
            if not st1:
                continue
            complement = tuple(k for k in idx if k not in S1)
            # S2 must contain the complement of S1 so that S1 U S2 = E
            for extra in _subsets(S1, E2 - len(complement)):
                S2 = tuple(sorted(complement + extra))
                if len(S2) != E2:
                    continue
                st2 = str_cache2.get(S2)
                if st2 is None:
                    st2 = _structures(G, S2, dg2.graph)
                    str_cache2[S2] = st2
                if not st2:
                    continue
                shared = tuple(k for k in S1 if k in set(S2))
                for s1 in st1:
                    for s2 in st2:
                        rep = min(
                            (_act_structure(a, s1), _act_structure(a, s2)) for a in auts
                        )
                        if rep in seen:
                            continue
                        seen.add(rep)
                        out.extend(
                            _transfer(G, s1, s2, dg1, dg2, shared, truncate)
                        )
    return out


def _subsets(pool, size):
    if size < 0:
        return
    yield from itertools.combinations(pool, size)


def _transfer(G, s1, s2, dg1, dg2, shared, truncate):
    psi_legs = [a + b for a, b in zip(dg1.psi_legs, dg2.psi_legs)]
    psi_edges = [[0, 0] for _ in G.edges]
    for (k, flip), (a, b) in zip(s1[0], dg1.psi_edges):
        if flip:
            a, b = b, a
        psi_edges[k][0] += a
        psi_edges[k][1] += b
    for (k, flip), (a, b) in zip(s2[0], dg2.psi_edges):
        if flip:
            a, b = b, a
        psi_edges[k][0] += a
        psi_edges[k][1] += b

    kappa_opts1 = _kappa_transfer_options(dg1, s1[1])
    kappa_opts2 = _kappa_transfer_options(dg2, s2[1])

    results = []
    sign = Fraction(-1) ** len(shared)
    for sides in itertools.product((0, 1), repeat=len(shared)):
        pe = [list(p) for p in psi_edges]
        for k, side in zip(shared, sides):
            pe[k][side] += 1
        for a1, c1 in kappa_opts1:
            for a2, c2 in kappa_opts2:
                kap = [dict() for _ in range(G.num_vertices)]
                for assign in (a1, a2):
                    for v, entry in assign.items():
                        for i, x in entry.items():
                            kap[v][i] = kap[v].get(i, 0) + x
                dg = make_decorated(
                    G.genera,
                    G.edges,
                    G.legs,
                    tuple(psi_legs),
                    tuple(tuple(p) for p in pe),
                    tuple(tuple(sorted(d.items())) for d in kap),
                )
                if truncate and dg.violates_degree_condition():
                    continue
                results.append((dg, sign * c1 * c2))
    return results


def multiply(x: StrataElement, y: StrataElement) -> StrataElement:
    """Excess intersection product in the strata algebra."""
    x._check_ambient(y)
    out: dict[DecoratedGraph, Fraction] = {}
    for dg1, c1 in x.terms.items():
        for dg2, c2 in y.terms.items():
            for dg, c in product_terms(dg1, dg2, x.g, x.n, truncate=True):
                out[dg] = out.get(dg, Fraction(0)) + c1 * c2 * c
    return StrataElement(x.g, x.n, out)


def multiply_by_psi(x: StrataElement, leg_exponents: dict[int, int]) -> StrataElement:
    """Fast path for multiplying by a psi monomial on the trivial graph."""
    out: dict[DecoratedGraph, Fraction] = {}
    for dg, c in x.terms.items():
        psi_legs = list(dg.psi_legs)
        for m, e in leg_exponents.items():
            psi_legs[m - 1] += e
        new = DecoratedGraph(dg.graph, tuple(psi_legs), dg.psi_edges, dg.kappa)
        if new.violates_degree_condition():
            continue
        out[new] = out.get(new, Fraction(0)) + c
    return StrataElement(x.g, x.n, out)


# ----------------------------------------------------------------------
# forgetful pushforward
# ----------------------------------------------------------------------

def _points_at(graph: StableGraph, v: int):
    sides = []
    for k, (u, w) in enumerate(graph.edges):
        if u == v:
            sides.append((k, 0))
        if w == v:
            sides.append((k, 1))
    legs = [m for m, vv in enumerate(graph.legs, start=1) if vv == v]
    return sides, legs


def _pushforward_term(dg: DecoratedGraph, f: int):
    """Push one decorated term forward under forgetting marking f.

    Yields (DecoratedGraph, coefficient, kappa_flag) triples in the target
    (markings above f shifted down by one).
    """
    graph = dg.graph
    v = graph.legs[f - 1]
    b = dg.psi_legs[f - 1]
    sides, legs_here = _points_at(graph, v)
    legs_other = [m for m in legs_here if m != f]
    npoints = len(sides) + len(legs_here)

    def shift_markings(legs, psi_legs):
        legs = [vv for m, vv in enumerate(legs, start=1) if m != f]
        psis = [e for m, e in enumerate(psi_legs, start=1) if m != f]
        return tuple(legs), tuple(psis)

    results = []
    if graph.genera[v] == 0 and npoints == 3:
        # the vertex destabilizes; all its decorations vanish by the degree bound
        assert b == 0 and not dg.kappa[v]
        assert all(dg.psi_edges[k][s] == 0 for k, s in sides)
        assert all(dg.psi_legs[m - 1] == 0 for m in legs_other)
        legs, psis = shift_markings(graph.legs, dg.psi_legs)
        if len(sides) == 2:
            (k1, s1), (k2, s2) = sides
            if k1 == k2:
                raise InvalidGraphError(
                    "forgetting this leg collapses a self-glued rational component"
                )
            far1 = (graph.edges[k1][1 - s1], dg.psi_edges[k1][1 - s1])
            far2 = (graph.edges[k2][1 - s2], dg.psi_edges[k2][1 - s2])
            drop = {k1, k2}
            edges = [e for k, e in enumerate(graph.edges) if k not in drop]
            psi_edges = [p for k, p in enumerate(dg.psi_edges) if k not in drop]
            edges.append((far1[0], far2[0]))
            psi_edges.append((far1[1], far2[1]))
        else:
            (k1, s1) = sides[0]
            (moved,) = legs_other
            far_vertex = graph.edges[k1][1 - s1]
            far_psi = dg.psi_edges[k1][1 - s1]
            edges = [e for k, e in enumerate(graph.edges) if k != k1]
            psi_edges = [p for k, p in enumerate(dg.psi_edges) if k != k1]
            legs = list(legs)
            psis = list(psis)
            idx = moved - 1 if moved < f else moved - 2
            legs[idx] = far_vertex
            psis[idx] = far_psi

        def drop_vertex(u):
            return u - 1 if u > v else u

        genera = [gv for u, gv in enumerate(graph.genera) if u != v]
        edges = [tuple(drop_vertex(a) for a in e) for e in edges]
        legs = tuple(drop_vertex(u) for u in legs)
        kappa = [vk for u, vk in enumerate(dg.kappa) if u != v]
        new = make_decorated(genera, edges, legs, tuple(psis), psi_edges, kappa)
        results.append((new, Fraction(1), False))
        return results

    # stable vertex: string / dilaton / kappa rules
    legs, psis_base = shift_markings(graph.legs, dg.psi_legs)
    kappa_v = {i: x for i, x in dg.kappa[v]}
    indices = sorted(kappa_v)
    ranges = [range(kappa_v[i] + 1) for i in indices]
    from .numerics import binomial as _binom

    for tvec in itertools.product(*ranges):
        mult = 1
        chosen = 0
        for i, t in zip(indices, tvec):
            mult *= _binom(kappa_v[i], t)
            chosen += i * t
        B = b + chosen
        remaining = {i: kappa_v[i] - t for i, t in zip(indices, tvec) if kappa_v[i] - t}
        if B == 0:
            # string: lower one psi exponent among the other points at v
            for k, s in sides:
                if dg.psi_edges[k][s] > 0:
                    pe = [list(p) for p in dg.psi_edges]
                    pe[k][s] -= 1
                    kap = list(dg.kappa)
                    kap[v] = tuple(sorted(remaining.items()))
                    new = make_decorated(
                        graph.genera, graph.edges, legs, psis_base,
                        [tuple(p) for p in pe], kap,
                    )
                    results.append((new, Fraction(mult), False))
            for m in legs_other:
                if dg.psi_legs[m - 1] > 0:
                    psis = list(psis_base)
                    idx = m - 1 if m < f else m - 2
                    psis[idx] -= 1
                    kap = list(dg.kappa)
                    kap[v] = tuple(sorted(remaining.items()))
                    new = make_decorated(
                        graph.genera, graph.edges, legs, tuple(psis),
                        dg.psi_edges, kap,
                    )
                    results.append((new, Fraction(mult), False))
            # no psi to lower: the fundamental class pushes to zero
        else:
            kap = list(dg.kappa)
            if B == 1:
                # dilaton: kappa_0 is the scalar 2g(v) - 2 + n(v) - 1
                scalar = 2 * graph.genera[v] - 2 + (npoints - 1)
                kap[v] = tuple(sorted(remaining.items()))
                coeff = Fraction(mult * scalar)
                flag = False
            else:
                merged = dict(remaining)
                merged[B - 1] = merged.get(B - 1, 0) + 1
                kap[v] = tuple(sorted(merged.items()))
                coeff = Fraction(mult)
                flag = True
            new = make_decorated(
                graph.genera, graph.edges, legs, psis_base, dg.psi_edges, kap
            )
            results.append((new, coeff, flag))
    return results


def pushforward_forget(x: StrataElement, marking: int) -> StrataElement:
    """Pushforward along the map forgetting one marked point.

    Markings above the forgotten one shift down by one.  Terms whose
    forgotten-point psi exponent is at least 2 generate kappa decorations;
    the result carries ``kappa_from_forgotten_psi = True`` in that case.
    """
    if not (1 <= marking <= x.n):
        raise ValueError(f"no marking {marking}")
    if 2 * x.g - 2 + (x.n - 1) <= 0:
        raise ValueError(f"target ({x.g},{x.n - 1}) is unstable")
    out: dict[DecoratedGraph, Fraction] = {}
    flag = False
    for dg, c in x.terms.items():
        for new, c2, kflag in _pushforward_term(dg, marking):
            flag = flag or kflag
            out[new] = out.get(new, Fraction(0)) + c * c2
    el = StrataElement(x.g, x.n - 1, out)
    el.kappa_from_forgotten_psi = flag
    return el
