import json
import random

import pytest

from trrkit.stablegraphs import (
    InvalidGraphError,
    canonical_labeling,
    StableGraph,
    automorphism_count,
    canonical_data,
    canonical_form,
    contract_edge,
    enumerate_stable_graphs,
    graph_from_json,
    graph_to_json,
    make_graph,
    validate,
)
from oracles import brute_force_automorphisms, brute_force_stable_graphs, graphs_isomorphic


def test_validate_examples():
    assert validate(make_graph([1], [], [0], check=False)) == []
    bad = StableGraph((0,), (), (0,))
    assert any("unstable" in p for p in validate(bad))
    bad2 = StableGraph((0, 0), ((0, 1),), ())
    problems = validate(bad2)
    assert sum("unstable" in p for p in problems) == 2
    assert any("not connected" in p for p in validate(StableGraph((1, 1), (), (0,))))


@pytest.mark.parametrize(
    "g,n,count", [(0, 3, 1), (1, 1, 2), (2, 0, 7), (1, 2, 5), (0, 4, 4)]
)
def test_enumeration_counts(g, n, count):
    assert len(enumerate_stable_graphs(g, n)) == count


@pytest.mark.parametrize("g,n", [(0, 3), (1, 1), (2, 0), (1, 2)])
def test_enumeration_against_brute_force(g, n):
    ours = enumerate_stable_graphs(g, n)
    brute = brute_force_stable_graphs(g, n)
    assert len(ours) == len(brute)
    for cand in brute:
        assert any(
            graphs_isomorphic(cand, (gr.genera, gr.edges, gr.legs)) for gr in ours
        )


def test_enumerated_graphs_are_valid():
    for g, n in [(1, 1), (1, 2), (2, 0), (0, 5)]:
        for gr in enumerate_stable_graphs(g, n):
            assert validate(gr) == []
            assert gr.genus() == g
            assert gr.n == n


def test_enumeration_edge_filter():
    for g, n in [(2, 0), (1, 2)]:
        full = enumerate_stable_graphs(g, n)
        for d in range(3 * g - 3 + n + 1):
            restricted = enumerate_stable_graphs(g, n, max_edges=d)
            assert set(restricted) == {gr for gr in full if gr.num_edges <= d}


def test_canonical_form_relabeling_invariance():
    rng = random.Random(2024)
    pool = []
    for g, n in [(1, 1), (1, 2), (2, 0), (0, 4)]:
        pool.extend(enumerate_stable_graphs(g, n))
    for _ in range(1000):
        gr = rng.choice(pool)
        V = gr.num_vertices
        perm = list(range(V))
        rng.shuffle(perm)
        genera = [0] * V
        for v in range(V):
            genera[perm[v]] = gr.genera[v]
        edges = [(perm[u], perm[w]) for u, w in gr.edges]
        rng.shuffle(edges)
        legs = [perm[v] for v in gr.legs]
        assert canonical_data(genera, edges, legs) == canonical_form(gr)


def test_canonical_form_distinguishes():
    a, b = enumerate_stable_graphs(1, 1)
    assert canonical_form(a) != canonical_form(b)


def test_automorphism_examples():
    assert automorphism_count(make_graph([3], [], [0, 0])) == 1
    assert automorphism_count(make_graph([0], [(0, 0)], [0])) == 2
    theta = make_graph([0, 0], [(0, 1), (0, 1), (0, 1)], [])
    assert automorphism_count(theta) == 12


def test_automorphisms_against_brute_force():
    for g, n in [(1, 1), (1, 2), (2, 0), (0, 4), (0, 5)]:
        for gr in enumerate_stable_graphs(g, n):
            if 2 * gr.num_edges + gr.n > 8:
                continue
            assert automorphism_count(gr) == brute_force_automorphisms(
                gr.genera, gr.edges, gr.legs
            )


def test_contract_examples():
    loop = make_graph([0], [(0, 0)], [0])
    assert contract_edge(loop, 0) == make_graph([1], [], [0])
    sep = make_graph([1, 1], [(0, 1)], [])
    assert contract_edge(sep, 0) == make_graph([2], [], [])
    theta = make_graph([0, 0], [(0, 1), (0, 1), (0, 1)], [])
    two_loops = contract_edge(theta, 0)
    assert two_loops == make_graph([0], [(0, 0), (0, 0)], [])
    assert two_loops.genus() == 2
    with pytest.raises(IndexError):
        contract_edge(loop, 5)


def test_contract_everything_gives_trivial():
    for g, n in [(1, 1), (1, 2), (2, 0)]:
        for gr in enumerate_stable_graphs(g, n):
            while gr.num_edges:
                gr = contract_edge(gr, 0)
            assert gr == make_graph([g], [], [0] * n)


def test_json_round_trip_bit_exact():
    for gr in enumerate_stable_graphs(2, 0) + enumerate_stable_graphs(1, 2):
        blob = json.dumps(graph_to_json(gr), sort_keys=True)
        again = graph_from_json(json.loads(blob))
        assert again == gr
        assert json.dumps(graph_to_json(again), sort_keys=True) == blob


def test_unstable_enumeration_rejected():
    with pytest.raises(InvalidGraphError):
        enumerate_stable_graphs(0, 2)


def test_canonical_labeling_achieves_key():
    rng = random.Random(77)
    pool = []
    for g, n in [(1, 2), (2, 0), (0, 5)]:
        pool.extend(enumerate_stable_graphs(g, n))
    for _ in range(50):
        gr = rng.choice(pool)
        perm = list(range(gr.num_vertices))
        rng.shuffle(perm)
        genera = [0] * gr.num_vertices
        for v in range(gr.num_vertices):
            genera[perm[v]] = gr.genera[v]
        edges = [(perm[u], perm[w]) for u, w in gr.edges]
        legs = [perm[v] for v in gr.legs]
        key, relabel = canonical_labeling(genera, edges, legs)
        assert key == canonical_form(gr)
        # applying the returned relabeling reproduces the key
        re_genera = [0] * gr.num_vertices
        for v in range(gr.num_vertices):
            re_genera[relabel[v]] = genera[v]
        re_edges = sorted(tuple(sorted((relabel[u], relabel[w]))) for u, w in edges)
        re_legs = tuple(relabel[v] for v in legs)
        assert (tuple(re_genera), tuple(re_edges), re_legs) == key


def test_half_edge_automorphism_count_matches():
    from trrkit.stablegraphs import half_edge_automorphisms

    for g, n in [(1, 1), (2, 0), (1, 2)]:
        for gr in enumerate_stable_graphs(g, n):
            assert len(half_edge_automorphisms(gr)) == automorphism_count(gr)
