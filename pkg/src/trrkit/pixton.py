"""Pixton's double ramification class machinery.

The fixed-r class is the weighted sum over stable graphs and weightings mod r
of exponential psi decorations; its coefficients are polynomial in r for
large r, and the constant term of that polynomial is the class whose
monomial coefficients in the leg variables yield tautological relations in
degrees above g.

Performance notes.  A weighting sum over a graph depends on the leg residues
only through the per-edge affine residue forms, whose constants are per-vertex
residue sums mod r; sums are memoized on that ordered structure.  Monomial
extraction over an integer tensor grid collapses blocks of legs with equal
target exponents to sorted tuples, symmetrizing the accumulated class once at
the end.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .numerics import (
    SparsePoly,
    binomial,
    factorial,
    interpolate,
    lagrange_coefficient_weights,
)
from .stablegraphs import (
    StableGraph,
    automorphism_count,
    enumerate_stable_graphs,
)
from .strata import DecoratedGraph, StrataElement, decorate_canonical_graph


class FitInstabilityError(RuntimeError):
    """Raised when the polynomial-in-r fit does not stabilize; the degree
    bound guess was wrong."""


class ComputationGuardError(RuntimeError):
    """Raised when a computation exceeds the default scale guard."""


def check_avector(a) -> tuple[int, ...]:
    a = tuple(int(v) for v in a)
    if sum(a) != 0:
        raise ValueError(f"leg values must sum to zero, got {a}")
    return a


# ----------------------------------------------------------------------
# weightings mod r
# ----------------------------------------------------------------------

_FLOW_CACHE: dict[StableGraph, tuple] = {}


def _flow_forms(graph: StableGraph):
    """Solve the weighting conditions by spanning-tree propagation.

    Returns (forms, free_edges): forms[k] = (sigma_coeffs, free_coeffs) so
    that the side-0 residue of edge k is
    (sum_v sigma_coeffs[v]*sigma_v + sum_j free_coeffs[j]*f_j) mod r, with one
    free variable per non-tree edge.  Loops never enter vertex conditions.
    """
    cached = _FLOW_CACHE.get(graph)
    if cached is not None:
        return cached
    V = graph.num_vertices
    E = graph.num_edges
    # BFS spanning tree
    tree_edge_of: dict[int, int] = {}
    parent: dict[int, int] = {}
    order = [0]
    seen = {0}
    tree_edges = set()
    frontier = [0]
    while frontier:
        nxt = []
        for v in frontier:
            for k, (x, y) in enumerate(graph.edges):
                if k in tree_edges or x == y:
                    continue
                if x == v and y not in seen:
                    other = y
                elif y == v and x not in seen:
                    other = x
                else:
                    continue
                tree_edges.add(k)
                tree_edge_of[other] = k
                parent[other] = v
                seen.add(other)
                order.append(other)
                nxt.append(other)
        frontier = nxt
    free_edges = [k for k in range(E) if k not in tree_edges]
    findex = {k: j for j, k in enumerate(free_edges)}
    nfree = len(free_edges)

    forms: list[tuple[tuple[int, ...], tuple[int, ...]] | None] = [None] * E
    for k in free_edges:
        fc = [0] * nfree
        fc[findex[k]] = 1
        forms[k] = ((0,) * V, tuple(fc))
    # back-substitute from the leaves toward the root
    for v in reversed(order[1:]):
        k_unknown = tree_edge_of[v]
        sc = [0] * V
        fc = [0] * nfree
        sc[v] += 1  # leg residues at v
        for k, (x, y) in enumerate(graph.edges):
            if k == k_unknown or x == y:
                continue
            if x == v or y == v:
                s = 1 if x == v else -1
                esc, efc = forms[k]
                for i in range(V):
                    sc[i] += s * esc[i]
                for j in range(nfree):
                    fc[j] += s * efc[j]
        # condition: sum + sign*t_unknown = 0  =>  t = -sign*sum
        x, y = graph.edges[k_unknown]
        sign = 1 if x == v else -1
        forms[k_unknown] = (
            tuple(-sign * c for c in sc),
            tuple(-sign * c for c in fc),
        )
    result = (tuple(forms), tuple(free_edges))
    _FLOW_CACHE[graph] = result
    return result


def _leg_sigma(graph: StableGraph, a, r: int) -> tuple[int, ...]:
    sigma = [0] * graph.num_vertices
    for m, v in enumerate(graph.legs, start=1):
        sigma[v] = (sigma[v] + a[m - 1]) % r
    return tuple(sigma)


def enumerate_weightings(graph: StableGraph, a, r: int):
    """Yield every weighting mod r as a map from half-edge ids to residues.

    Half-edge ids are ("leg", marking) and ("edge", k, side).  The count is
    r^h1 since the residues on non-tree edges are free and the rest are
    forced by the vertex conditions.
    """
    a = check_avector(a)
    if r < 1:
        raise ValueError("modulus must be positive")
    forms, free_edges = _flow_forms(graph)
    sigma = _leg_sigma(graph, a, r)
    for fvec in itertools.product(range(r), repeat=len(free_edges)):
        w = {}
        for m in range(1, graph.n + 1):
            w[("leg", m)] = a[m - 1] % r
        for k in range(graph.num_edges):
            sc, fc = forms[k]
            t = (
                sum(c * s for c, s in zip(sc, sigma))
                + sum(c * f for c, f in zip(fc, fvec))
            ) % r
            w[("edge", k, 0)] = t
            w[("edge", k, 1)] = (-t) % r
        yield w


_POWER_SUM_CACHE: dict[tuple, dict] = {}
_TAU_CACHE: dict[int, list[int]] = {}
_T1_CACHE: dict[tuple[int, int], int] = {}
_CONV_CACHE: dict[tuple[int, int, int], list[int]] = {}


def _tau(r: int) -> list[int]:
    table = _TAU_CACHE.get(r)
    if table is None:
        table = [x * (r - x) for x in range(r)]
        _TAU_CACHE[r] = table
    return table


def _tau_power_sum(r: int, alpha: int) -> int:
    """sum_x tau(x)^alpha over Z_r."""
    value = _T1_CACHE.get((r, alpha))
    if value is None:
        tau = _tau(r)
        value = sum(q**alpha for q in tau)
        _T1_CACHE[(r, alpha)] = value
    return value


def _tau_convolution(r: int, alpha: int, beta: int) -> list[int]:
    """CONV[u] = sum_{x+y = u mod r} tau(x)^alpha tau(y)^beta.

    tau(-x) = tau(x), so every sign pattern of the residue substitutions
    reduces to this one table.
    """
    if alpha > beta:
        alpha, beta = beta, alpha
    table = _CONV_CACHE.get((r, alpha, beta))
    if table is None:
        tau = _tau(r)
        pa = [q**alpha for q in tau]
        pb = [q**beta for q in tau]
        table = [0] * r
        for x in range(r):
            if pa[x] == 0:
                continue
            qx = pa[x]
            for u in range(r):
                table[u] += qx * pb[u - x]
        _CONV_CACHE[(r, alpha, beta)] = table
    return table


def _component_sum(r, comp_vars, comp_edges, consts, exps):
    """Sum over the residues of one coupled block of free variables of the
    product of tau powers of its edges.

    comp_edges lists (edge index, coeff row restricted to comp_vars); the
    free edges themselves have zero constant, so one-variable blocks always
    reduce to the global tables unless two or more shifted edges remain.
    """
    tau = _tau(r)
    pure_alpha = 0
    shifted = []  # (const, exponent, coeff row)
    for k, row in comp_edges:
        c0 = consts[k][0]
        e = exps[k]
        if c0 == 0 and sum(1 for c in row if c) == 1:
            pure_alpha += e
        else:
            shifted.append((c0, e, row))
    nvars = len(comp_vars)
    if nvars == 1:
        if not shifted:
            return _tau_power_sum(r, pure_alpha)
        if len(shifted) == 1:
            c0, e, _ = shifted[0]
            return _tau_convolution(r, pure_alpha, e)[c0]
        total = 0
        for f in range(r):
            prod = tau[f] ** pure_alpha if pure_alpha else 1
            for c0, e, row in shifted:
                q = tau[(c0 + row[0] * f) % r]
                if q == 0:
                    prod = 0
                    break
                prod *= q**e
            total += prod
        return total
    if nvars == 2:
        a_only, b_only, both = [], [], []
        for c0, e, row in shifted:
            nz = [i for i, c in enumerate(row) if c]
            (both if len(nz) == 2 else (a_only if nz == [0] else b_only)).append(
                (c0, e, row)
            )
        # split the pure weight: pure edges touch exactly one variable
        alpha = [0, 0]
        for k, row in comp_edges:
            if consts[k][0] == 0 and sum(1 for c in row if c) == 1:
                var = next(i for i, c in enumerate(row) if c)
                alpha[var] += exps[k]
        if len(both) == 1 and not a_only and not b_only:
            c0, e, _ = both[0]
            conv = _tau_convolution(r, alpha[0], alpha[1])
            total = 0
            for u in range(r):
                q = tau[(c0 + u) % r]
                if q:
                    total += conv[u] * q**e
            return total
    # generic fallback: brute force over the block
    total = 0
    for fvec in itertools.product(range(r), repeat=nvars):
        prod = 1
        for k, row in comp_edges:
            t = (consts[k][0] + sum(c * f for c, f in zip(row, fvec))) % r
            q = tau[t]
            if q == 0:
                prod = 0
                break
            prod *= q ** exps[k]
        total += prod
    return total


def weighting_power_sums(graph: StableGraph, a, r: int, profiles) -> dict[tuple[int, ...], int]:
    """For each edge-exponent profile (m_e), the integer sum over weightings
    of prod_e (w(h_e) * w(h_e'))^(m_e + 1).

    The sum depends on the leg residues only through the per-edge affine
    residue forms (whose constants are per-vertex residue sums mod r), so it
    is memoized on exactly that ordered structure; the edge order ties the
    profile entries to the forms.  Coupled blocks of free variables are
    evaluated through shared convolution tables of tau(x) = x(r-x).
    """
    sigma = _leg_sigma(graph, a, r)
    profiles = tuple(sorted(profiles))
    forms, free_edges = _flow_forms(graph)
    E = graph.num_edges
    consts = []
    for k in range(E):
        sc, fc = forms[k]
        consts.append(
            (sum(c * s for c, s in zip(sc, sigma)) % r, fc)
        )
    key = (tuple(consts), r, profiles)
    cached = _POWER_SUM_CACHE.get(key)
    if cached is not None:
        return cached

    tau = _tau(r)
    nfree = len(free_edges)
    # group free variables into coupled blocks
    parent = list(range(nfree))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for c0, row in consts:
        touched = [i for i, c in enumerate(row) if c]
        for i in touched[1:]:
            parent[find(touched[0])] = find(i)
    blocks: dict[int, list[int]] = {}
    for i in range(nfree):
        blocks.setdefault(find(i), []).append(i)
    comp_of_edge: dict[int, int] = {}
    const_edges = []
    for k in range(E):
        row = consts[k][1]
        touched = [i for i, c in enumerate(row) if c]
        if touched:
            comp_of_edge[k] = find(touched[0])
        else:
            const_edges.append(k)

    out = {}
    for p in profiles:
        exps = [m + 1 for m in p]
        total = 1
        for k in const_edges:
            q = tau[consts[k][0]]
            if q == 0:
                total = 0
                break
            total *= q ** exps[k]
        if total:
            for root, members in blocks.items():
                comp_edges = [
                    (k, tuple(consts[k][1][i] for i in members))
                    for k in range(E)
                    if comp_of_edge.get(k) == root
                ]
                total *= _component_sum(r, members, comp_edges, consts, exps)
                if total == 0:
                    break
        out[p] = total
    _POWER_SUM_CACHE[key] = out
    return out


# ----------------------------------------------------------------------
# the fixed-r class
# ----------------------------------------------------------------------

@dataclass
class _Template:
    profile: tuple[int, ...]
    leg_exponents: tuple[int, ...]
    base_num: int  # base coefficient times the plan's common denominator
    key: DecoratedGraph


_TEMPLATE_CACHE: dict[tuple, tuple] = {}
_AUT_COUNT_CACHE: dict[StableGraph, int] = {}


def _aut_count(graph: StableGraph) -> int:
    c = _AUT_COUNT_CACHE.get(graph)
    if c is None:
        c = automorphism_count(graph)
        _AUT_COUNT_CACHE[graph] = c
    return c


def _graph_templates(graph: StableGraph, dmax: int, reserved_markings=frozenset()):
    """Decoration templates for one graph: every way to place psi exponents
    from the edge series and leg exponentials within the degree caps.

    ``reserved_markings`` holds one unit of capacity at each listed leg for a
    later psi multiplication; graphs and templates with no room are dropped.
    """
    cache_key = (graph, dmax, tuple(sorted(reserved_markings)))
    cached = _TEMPLATE_CACHE.get(cache_key)
    if cached is not None:
        return cached

    E = graph.num_edges
    extra = dmax - E
    caps = list(graph.capacities())
    for m in reserved_markings:
        caps[graph.legs[m - 1]] -= 1
    if extra < 0 or any(c < 0 for c in caps):
        result = ((), (), 1)
        _TEMPLATE_CACHE[cache_key] = result
        return result

    side_vertices = []
    for k, (u, w) in enumerate(graph.edges):
        side_vertices.append((u, w))

    templates: list[_Template] = []
    profiles = set()

    def edge_profiles(budget):
        for profile in itertools.product(*(range(budget + 1) for _ in range(E))):
            if sum(profile) <= budget:
                yield profile

    for profile in edge_profiles(extra):
        rem_after_edges = extra - sum(profile)
        base_edges = Fraction(1)
        for m in profile:
            base_edges *= Fraction((-1) ** m, 2 ** (m + 1) * factorial(m + 1))
        split_ranges = [range(m + 1) for m in profile]
        for splits in itertools.product(*split_ranges):
            vdeg = [0] * graph.num_vertices
            okay = True
            for k, (m, j) in enumerate(zip(profile, splits)):
                u, w = side_vertices[k]
                vdeg[u] += j
                vdeg[w] += m - j
                if vdeg[u] > caps[u] or vdeg[w] > caps[w]:
                    okay = False
                    break
            if not okay:
                continue
            base_split = base_edges
            for m, j in zip(profile, splits):
                base_split *= binomial(m, j)

            def leg_loop(m, budget, vdeg_now, cvec, base_now):
                if m > graph.n:
                    psi_edges = tuple(
                        (j, mm - j) for mm, j in zip(profile, splits)
                    )
                    key = decorate_canonical_graph(
                        graph,
                        tuple(cvec),
                        psi_edges,
                        tuple(() for _ in range(graph.num_vertices)),
                    )
                    templates.append(
                        (profile, tuple(cvec), base_now, key)
                    )
                    return
                v = graph.legs[m - 1]
                top = min(budget, caps[v] - vdeg_now[v])
                for c in range(top + 1):
                    cvec.append(c)
                    vdeg_now[v] += c
                    leg_loop(
                        m + 1,
                        budget - c,
                        vdeg_now,
                        cvec,
                        base_now / (Fraction(2) ** c * factorial(c)),
                    )
                    vdeg_now[v] -= c
                    cvec.pop()

            leg_loop(1, rem_after_edges, list(vdeg), [], base_split)
        profiles.add(profile)

    # rescale bases to a common integer numerator
    from math import lcm

    common = 1
    for _, _, base, _ in templates:
        common = lcm(common, base.denominator)
    packed = tuple(
        _Template(profile, legs_c, int(base * common), key)
        for profile, legs_c, base, key in templates
    )
    result = (packed, tuple(sorted(profiles)), common)
    _TEMPLATE_CACHE[cache_key] = result
    return result


def _psi_survivor_ok(graph: StableGraph, survivors) -> bool:
    """A graph survives multiplication by psi at the given markings only if
    every vertex has capacity for the forced exponents."""
    if not survivors:
        return True
    count = [0] * graph.num_vertices
    for m in survivors:
        count[graph.legs[m - 1]] += 1
    return all(
        count[v] <= graph.vertex_capacity(v) for v in range(graph.num_vertices)
    )


_PLAN_CACHE: dict[tuple, tuple] = {}


def _class_plan(g: int, n: int, dmax: int, survivors) -> tuple:
    """Surviving graphs with their decoration templates, precomputed once per
    (g, n, dmax, survivor set)."""
    key = (g, n, dmax, tuple(sorted(survivors)))
    cached = _PLAN_CACHE.get(key)
    if cached is None:
        plan = []
        for graph in enumerate_stable_graphs(g, n, max_edges=dmax):
            if survivors and not _psi_survivor_ok(graph, survivors):
                continue
            templates, profiles, common = _graph_templates(
                graph, dmax, frozenset(survivors)
            )
            if not templates:
                continue
            plan.append(
                (graph, templates, profiles, graph.h1(), _aut_count(graph), common)
            )
        cached = tuple(plan)
        _PLAN_CACHE[key] = cached
    return cached


def fixed_r_class(g: int, n: int, a, r: int, dmax: int, survivors=frozenset()) -> StrataElement:
    """The weighted graph sum at a fixed modulus r, truncated to total degree
    at most dmax.  Graphs with more than dmax edges cannot contribute."""
    a = check_avector(a)
    if len(a) != n:
        raise ValueError("leg value count must equal n")
    if r < 1:
        raise ValueError("modulus must be positive")
    if dmax > 3 * g - 3 + n:
        raise ValueError("degree cap exceeds the dimension")
    terms: dict[DecoratedGraph, Fraction] = {}
    for graph, templates, profiles, h1, aut, common in _class_plan(g, n, dmax, survivors):
        sums = weighting_power_sums(graph, a, r, profiles)
        local: dict[DecoratedGraph, int] = {}
        leg_cache: dict[tuple[int, ...], int] = {}
        for tpl in templates:
            w = sums[tpl.profile]
            if w == 0:
                continue
            apow = leg_cache.get(tpl.leg_exponents)
            if apow is None:
                apow = 1
                for m, c in enumerate(tpl.leg_exponents, start=1):
                    if c:
                        apow *= a[m - 1] ** (2 * c)
                leg_cache[tpl.leg_exponents] = apow
            if apow == 0:
                continue
            inc = tpl.base_num * w * apow
            prev = local.get(tpl.key)
            local[tpl.key] = inc if prev is None else prev + inc
        den = common * aut * r**h1
        for key2, num in local.items():
            if num == 0:
                continue
            add = Fraction(num, den)
            prev = terms.get(key2)
            terms[key2] = add if prev is None else prev + add
    return StrataElement(g, n, terms)


class RPolynomialClass:
    """A class whose coefficients are exact polynomial fits in the modulus r,
    validated on held-out nodes."""

    def __init__(self, g, n, polys, r_nodes):
        self.g = g
        self.n = n
        self.polys: dict[DecoratedGraph, SparsePoly] = polys
        self.r_nodes = tuple(r_nodes)

    def constant_term(self) -> StrataElement:
        terms = {
            dg: poly.coefficient((0,)) for dg, poly in self.polys.items()
        }
        return StrataElement(self.g, self.n, terms)


def _newton_diagonal(nodes, values):
    """Newton divided-difference coefficients for the given nodes."""
    dd = list(values)
    for level in range(1, len(nodes)):
        for i in range(len(nodes) - 1, level - 1, -1):
            dd[i] = (dd[i] - dd[i - 1]) / (nodes[i] - nodes[i - level])
    return dd


def _newton_eval(nodes, dd, x):
    acc = dd[-1]
    for i in range(len(dd) - 2, -1, -1):
        acc = acc * (x - nodes[i]) + dd[i]
    return acc


def _newton_fits(samples: dict[int, StrataElement], rs) -> dict:
    keys = set()
    for r in rs:
        keys.update(samples[r].terms)
    fits = {}
    zero = Fraction(0)
    for key in keys:
        values = [samples[r].terms.get(key, zero) for r in rs]
        fits[key] = _newton_diagonal(rs, values)
    return fits


class _IncrementalFits:
    """Newton coefficients per decorated-graph key, extended node by node.

    For each key the rightmost column of the divided-difference triangle is
    kept, so appending a node costs O(current length)."""

    def __init__(self):
        self.nodes: list[int] = []
        self.coeffs: dict = {}
        self.tails: dict = {}

    def extend(self, r: int, terms: dict):
        zero = Fraction(0)
        for key in terms.keys() - self.coeffs.keys():
            # a key unseen so far was zero at all earlier nodes
            coeffs = []
            tail = []
            for i, x in enumerate(self.nodes):
                entry = zero
                tail.append(entry)
                coeffs.append(entry)
            self.coeffs[key] = coeffs
            self.tails[key] = tail
        m = len(self.nodes)
        for key, coeffs in self.coeffs.items():
            y = terms.get(key, zero)
            tail = self.tails[key]
            ntail = [y]
            for i in range(1, m + 1):
                ntail.append(
                    (ntail[i - 1] - tail[i - 1]) / (r - self.nodes[m - i])
                )
            coeffs.append(ntail[m])
            self.tails[key] = ntail
        self.nodes.append(r)

    def trailing_zero(self, count: int) -> bool:
        return all(
            all(c == 0 for c in coeffs[-count:])
            for coeffs in self.coeffs.values()
        )

    def evaluate(self, key, x):
        coeffs = self.coeffs.get(key)
        if not coeffs:
            return Fraction(0)
        return _newton_eval(self.nodes, coeffs, x)


def _newton_to_poly(nodes, dd) -> SparsePoly:
    coeffs = [Fraction(0)] * len(dd)
    basis = [Fraction(1)]
    for k, c in enumerate(dd):
        for i, b in enumerate(basis):
            coeffs[i] += c * b
        new = [Fraction(0)] * (len(basis) + 1)
        for i, b in enumerate(basis):
            new[i + 1] += b
            new[i] -= nodes[k] * b
        basis = new
    return SparsePoly(("r",), {(i,): c for i, c in enumerate(coeffs) if c})


def constant_term_class(
    g: int,
    n: int,
    a,
    dmax: int,
    r0: int | None = None,
    survivors=frozenset(),
    max_nodes: int | None = None,
):
    """Constant term in r of the graph sum: fit each coefficient as a
    polynomial in r on nodes r0, r0+1, ... and take its value at 0.

    The fit ramps the node count from dmax+2 until two successive fits agree
    and two held-out nodes validate; failure to stabilize raises
    :class:`FitInstabilityError`.
    """
    a = check_avector(a)
    if r0 is None:
        r0 = 2 * max((abs(v) for v in a), default=1) * max(dmax, 1) + 3
    if max_nodes is None:
        max_nodes = 2 * dmax + 9
    samples: dict[int, StrataElement] = {}

    def sample(r):
        if r not in samples:
            samples[r] = fixed_r_class(g, n, a, r, dmax, survivors)
        return samples[r]

    fits = _IncrementalFits()
    zero = Fraction(0)
    k = dmax + 2
    for t in range(k):
        fits.extend(r0 + t, sample(r0 + t).terms)
    while k <= max_nodes:
        # on nested node sets, the fit with two fewer nodes coincides with
        # this one exactly when the two trailing Newton coefficients vanish
        if len(fits.nodes) > k - 2 >= dmax + 2 and fits.trailing_zero(2):
            held_out = [r0 + k, r0 + k + 1]
            ok = True
            for r in held_out:
                cls = sample(r)
                for key in set(fits.coeffs) | set(cls.terms):
                    if fits.evaluate(key, r) != cls.terms.get(key, zero):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                constants = {
                    key: fits.evaluate(key, 0) for key in fits.coeffs
                }
                return StrataElement(g, n, constants), {
                    "r0": r0,
                    "r_nodes": list(fits.nodes) + held_out,
                    "dmax": dmax,
                }
        if k + 2 > max_nodes:
            break
        for t in range(k, k + 2):
            fits.extend(r0 + t, sample(r0 + t).terms)
        k += 2
    raise FitInstabilityError(
        f"coefficient fit in r did not stabilize within {max_nodes} nodes"
    )


def fit_r_polynomials(g: int, n: int, a, dmax: int, **kwargs) -> RPolynomialClass:
    """The validated polynomial-in-r fits themselves (one per decorated
    graph), for callers that want more than the constant term."""
    element, meta = constant_term_class(g, n, a, dmax, **kwargs)
    rs = meta["r_nodes"]
    samples = {r: fixed_r_class(g, n, a, r, dmax, kwargs.get("survivors", frozenset())) for r in rs}
    fits = _newton_fits(samples, rs)
    polys = {key: _newton_to_poly(rs, dd) for key, dd in fits.items()}
    return RPolynomialClass(g, n, polys, rs)


def pixton_class(g: int, n: int, a, dmax: int, **kwargs) -> StrataElement:
    """Constant term of the graph sum (the class itself, degrees <= dmax)."""
    element, _ = constant_term_class(g, n, a, dmax, **kwargs)
    return element


def _grid_stabilizer_order(values) -> int:
    order = 1
    for _, group in itertools.groupby(sorted(values)):
        order *= factorial(len(tuple(group)))
    return order


def _grid_worker(args):
    """Accumulate the weighted constant-term classes of one chunk of grid
    points; used directly and as the multiprocessing worker."""
    g, n, d, r0, survivors, points = args
    survivors = frozenset(survivors)
    acc: dict[DecoratedGraph, Fraction] = {}
    r_nodes: set[int] = set()
    evals = 0
    for a_full, scale in points:
        element, info = constant_term_class(g, n, a_full, d, r0=r0, survivors=survivors)
        evals += 1
        r_nodes.update(info["r_nodes"])
        for dg, c in element.terms.items():
            acc[dg] = acc.get(dg, Fraction(0)) + scale * c
    return acc, evals, sorted(r_nodes)


def monomial_coefficient(
    g: int,
    n: int,
    exponents,
    d: int,
    allow_large: bool = False,
    survivors=frozenset(),
    cost_budget: int = 500_000,
    jobs: int = 1,
):
    """Coefficient of prod_j a_j^(b_j) in the degree-d part of the class,
    computed by exact interpolation on an integer tensor grid.

    Legs with equal target exponents are collapsed to sorted tuples; the
    accumulated class is symmetrized over those blocks at the end.  Returns
    (element, meta).

    The default guard estimates cost as grid evaluations times modulus times
    interpolation nodes and refuses jobs above ``cost_budget`` unless
    ``allow_large`` is set.
    """
    exponents = tuple(int(b) for b in exponents)
    if len(exponents) != n - 1:
        raise ValueError("need one exponent per marking 2..n")
    if d > 3 * g - 3 + n:
        raise ValueError("degree exceeds the dimension")
    markings = list(range(2, n + 1))
    degree = 2 * d
    # legs may be collapsed only when both the target exponent and the
    # survivor status agree, since pruning distinguishes survivor legs
    by_exponent: dict[tuple, list[int]] = {}
    for m, b in zip(markings, exponents):
        by_exponent.setdefault((b, m in survivors), []).append(m)
    sym_blocks = [ms for ms in by_exponent.values() if len(ms) > 1]
    asym = sorted(m for ms in by_exponent.values() if len(ms) == 1 for m in ms)

    total_evals = (degree + 1) ** len(asym)
    for ms in sym_blocks:
        total_evals *= len(
            list(itertools.combinations_with_replacement(range(degree + 1), len(ms)))
        )
    weights = {
        m: lagrange_coefficient_weights(degree, b)
        for m, b in zip(markings, exponents)
    }
    max_abs = max(degree * (n - 1), degree, 1)
    r0 = 2 * max_abs * max(d, 1) + 3
    cost = total_evals * r0 * (d + 2)
    if cost > cost_budget and not allow_large:
        raise ComputationGuardError(
            f"estimated cost {cost} (evaluations x modulus x nodes) exceeds "
            "the default budget; pass allow_large to proceed"
        )

    meta = {"grid_degree": degree, "evaluations": 0, "r0": r0, "r_nodes": []}

    block_choices = [
        list(itertools.combinations_with_replacement(range(degree + 1), len(ms)))
        for ms in sym_blocks
    ]
    points = []
    for asym_vals in itertools.product(range(degree + 1), repeat=len(asym)):
        for block_vals in itertools.product(*block_choices):
            assignment = dict(zip(asym, asym_vals))
            stab = 1
            weight = Fraction(1)
            for ms, vals in zip(sym_blocks, block_vals):
                stab *= _grid_stabilizer_order(vals)
                for m, val in zip(ms, vals):
                    assignment[m] = val
            avec = tuple(assignment[m] for m in markings)
            for m in markings:
                weight *= weights[m][assignment[m]]
            if weight == 0:
                continue
            points.append(((-sum(avec),) + avec, weight / stab))

    acc: dict[DecoratedGraph, Fraction] = {}
    jobs = max(1, int(jobs))
    if jobs > 1 and len(points) > 1:
        # warm the plan and template caches before forking
        _class_plan(g, n, d, survivors)
        chunks = [points[i::jobs] for i in range(jobs)]
        args = [(g, n, d, r0, tuple(sorted(survivors)), chunk) for chunk in chunks]
        from multiprocessing import Pool

        with Pool(processes=jobs) as pool:
            partials = pool.map(_grid_worker, args)
        for terms, evals, r_nodes in partials:
            meta["evaluations"] += evals
            meta["r_nodes"] = sorted(set(meta["r_nodes"]) | set(r_nodes))
            for dg, c in terms.items():
                acc[dg] = acc.get(dg, Fraction(0)) + c
    else:
        terms, evals, r_nodes = _grid_worker(
            (g, n, d, r0, tuple(sorted(survivors)), points)
        )
        meta["evaluations"] = evals
        meta["r_nodes"] = r_nodes
        acc = terms

    accumulated = StrataElement(g, n, acc)
    if sym_blocks:
        result = StrataElement.zero(g, n)
        group_perms = [
            list(itertools.permutations(ms)) for ms in sym_blocks
        ]
        for combo in itertools.product(*group_perms):
            perm: dict[int, int] = {}
            for ms, arranged in zip(sym_blocks, combo):
                perm.update(dict(zip(ms, arranged)))
            result = result + accumulated.relabel_legs(perm)
    else:
        result = accumulated
    return result.degree_component(d), meta
