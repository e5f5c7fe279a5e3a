import random

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from kneser_ekr.core import Params, graph_of
from kneser_ekr.solver import (SampleGraph, alpha, brute_force_alpha, brute_force_nonstar_alpha,
                               find_independent_set, find_nonstar_independent_set,
                               has_independent_near_star, has_independent_superstar,
                               independent_superstar_count, is_ekr, max_nonstar_alpha,
                               min_star_degree)

P52, P73, P94 = Params(5, 2), Params(7, 3), Params(9, 4)


def random_graph(p, rng, prob):
    return SampleGraph.from_edges(p, [t for t in range(p.edge_count) if rng.random() < prob])


def is_nonstar(g, fam):
    z = g.params.full_mask
    for m in fam:
        z &= m
    return len(fam) > 0 and z == 0


@pytest.mark.parametrize("p,a,hm", [(P52, 4, 3), (P73, 15, 13), (P94, 56, 53)])
def test_full_graph_values(p, a, hm):
    g = SampleGraph.full(p)
    assert a == p.star_size
    assert hm == p.hilton_milner
    assert alpha(g).value == a
    assert max_nonstar_alpha(g).value == hm
    assert is_ekr(g)


def test_empty_graph():
    g = SampleGraph.empty(P52)
    assert alpha(g).value == 10 == brute_force_alpha(g)
    assert max_nonstar_alpha(g).value == 10 == brute_force_nonstar_alpha(g)
    assert not is_ekr(g)


def test_single_edge():
    g = SampleGraph.from_edges(P52, [0])
    assert brute_force_alpha(g) == 9 == alpha(g).value


def test_brute_force_on_full_petersen():
    g = SampleGraph.full(P52)
    assert brute_force_alpha(g) == 4
    assert brute_force_nonstar_alpha(g) == 3


def test_witnesses_are_valid():
    rng = random.Random(1)
    for _ in range(50):
        g = random_graph(P73, rng, rng.random())
        r = alpha(g)
        assert len(r.witness) == r.value and g.is_independent(r.witness.bits)
        q = max_nonstar_alpha(g)
        assert len(q.witness) == q.value and g.is_independent(q.witness.bits)
        assert is_nonstar(g, list(q.witness))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2 ** P52.edge_count - 1))
def test_agrees_with_brute_force(present):
    g = SampleGraph(P52, present)
    assert alpha(g).value == brute_force_alpha(g)
    assert max_nonstar_alpha(g).value == brute_force_nonstar_alpha(g)


def complement_graph(g):
    kg = graph_of(g.params)
    h = nx.Graph()
    h.add_nodes_from(range(len(kg.vertices)))
    adj = g.adj
    for i in range(len(kg.vertices)):
        for j in range(i + 1, len(kg.vertices)):
            if not adj[i] >> j & 1:
                h.add_edge(i, j)
    return h


def test_networkx_oracle_on_johnson_scale():
    # independent sets of g are cliques of its complement; the largest clique
    # whose members share no element gives the non-star value
    rng = random.Random(2)
    kg = graph_of(P73)
    for prob in (0.3, 0.6, 0.9):
        for _ in range(4):
            g = random_graph(P73, rng, prob)
            h = complement_graph(g)
            _, w = nx.max_weight_clique(h, weight=None)
            assert alpha(g).value == w
            best = 0
            for c in nx.find_cliques(h):
                z = P73.full_mask
                for v in c:
                    z &= kg.vertices[v]
                if z == 0:
                    best = max(best, len(c))
            assert max_nonstar_alpha(g).value == best


def test_monotone_along_prefixes():
    rng = random.Random(3)
    order = list(range(P73.edge_count))
    rng.shuffle(order)
    prev_a, prev_n = None, None
    present = 0
    for step, t in enumerate(order):
        present |= 1 << t
        if step % 7:
            continue
        g = SampleGraph(P73, present)
        a, nn = alpha(g).value, max_nonstar_alpha(g).value
        assert a >= P73.star_size and nn <= a
        if prev_a is not None:
            assert a <= prev_a and nn <= prev_n
        prev_a, prev_n = a, nn


def test_superstar_implies_not_ekr():
    rng = random.Random(4)
    seen = 0
    for _ in range(200):
        g = random_graph(P73, rng, 0.4)
        if has_independent_superstar(g):
            seen += 1
            assert not is_ekr(g)
            assert alpha(g).value > P73.star_size
        if max_nonstar_alpha(g).value == alpha(g).value:
            assert not is_ekr(g)
        assert is_ekr(g) == (max_nonstar_alpha(g).value < P73.star_size)
    assert seen > 0


def test_degree_helpers():
    g = SampleGraph.empty(P52)
    # 5 stars, each with 6 outside sets
    assert independent_superstar_count(g) == 30
    assert has_independent_near_star(g)
    full = SampleGraph.full(P52)
    assert min_star_degree(full) == P52.star_degree == 2
    assert not has_independent_superstar(full) and not has_independent_near_star(full)


def test_near_star_degree_rule_by_direct_check():
    rng = random.Random(5)
    kg = graph_of(P52)
    for _ in range(100):
        g = random_graph(P52, rng, rng.random())
        found = False
        for x in range(1, 6):
            star = kg.star_bits[x]
            for a in range(10):
                if star >> a & 1:
                    continue
                for b in range(10):
                    if star >> b & 1 and g.is_independent((star & ~(1 << b)) | 1 << a):
                        found = True
        assert found == has_independent_near_star(g)


def test_find_targets():
    g = SampleGraph.full(P73)
    assert find_independent_set(g, 15) is not None
    assert find_independent_set(g, 16) is None
    assert find_nonstar_independent_set(g, 13) is not None
    assert find_nonstar_independent_set(g, 14) is None


def test_size_limits():
    with pytest.raises(ValueError):
        brute_force_alpha(SampleGraph.full(P73))
    with pytest.raises(ValueError):
        alpha(SampleGraph.full(Params(13, 6)))
    with pytest.raises(ValueError):
        SampleGraph(P52, 1 << P52.edge_count)
