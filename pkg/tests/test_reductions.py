import math
import random
from itertools import combinations

import pytest

from kneser_ekr.core import Family, Params, graph_of, kset, near_star, star
from kneser_ekr.diversity import classify_family, decompose, degree_split, two_linked_components
from kneser_ekr.reductions import (Certificate, CertificateFailure, PreconditionError, build_certificate,
                                   check_certificate, component_reduce, default_p1, edge_set,
                                   reduce_to_T2, reduction_report)
from kneser_ekr.sampling import perturbed_star, random_T1_family

P52, P73, P94 = Params(5, 2), Params(7, 3), Params(9, 4)


def s(p, *els):
    return kset(p, els)


def mask_edges(f):
    """Disjoint pairs of members, as mask pairs (independent of vertex indexing)."""
    return {(a, b) for a, b in combinations(sorted(f), 2) if a & b == 0}


def test_reduce_to_T2_golden():
    A = s(P73, 2, 3, 4)
    B = s(P73, 1, 2, 3)
    kg = graph_of(P73)
    f = Family.from_bits(P73, (kg.star_bits[1] & ~(1 << kg.index[B])) | 1 << kg.index[A])
    g = reduce_to_T2(f)
    d = decompose(g)
    assert d.x == 1 and d.A.labels() == ["234"] and d.B.labels() == ["156"]
    assert mask_edges(g) < mask_edges(f)
    assert all(reduction_report(f, g).values())


def test_reduce_to_T2_identity_on_T2():
    kg = graph_of(P73)
    f = near_star(P73, 1, s(P73, 2, 3, 4), s(P73, 1, 5, 6))
    assert decompose(f).B.bits & ~kg.neighbourhood(decompose(f).A.bits) == 0
    assert reduce_to_T2(f) == f


def test_reduce_to_T2_preconditions():
    with pytest.raises(PreconditionError):
        reduce_to_T2(star(P73, 2))
    # on K(5,2) every non-star already violates a < C(3,1)/3
    with pytest.raises(PreconditionError):
        reduce_to_T2(near_star(P52, 1, s(P52, 2, 3), s(P52, 1, 4)))
    rng = random.Random(1)
    f = perturbed_star(P73, rng, 4, x=1)
    with pytest.raises(PreconditionError):
        reduce_to_T2(f)


def test_reduce_to_T2_random():
    rng = random.Random(2)
    for _ in range(400):
        f = random_T1_family(P73, rng, max_a=3)
        g = reduce_to_T2(f)
        r = reduction_report(f, g)
        assert all(r.values()), (f, g, r)
        assert mask_edges(g) <= mask_edges(f)
        d0, d1 = decompose(f), decompose(g)
        # members of B adjacent to A survive into B'
        kg = graph_of(P73)
        assert d0.B.bits & kg.neighbourhood(d0.A.bits) & ~d1.B.bits == 0


def test_component_reduce_single_component():
    f = near_star(P94, 1, s(P94, 2, 3, 4, 5), s(P94, 1, 6, 7, 8))
    assert len(two_linked_components(decompose(f).A, 1)) == 1
    g = component_reduce(f, 0)
    assert decompose(g).A == decompose(f).A
    with pytest.raises(IndexError):
        component_reduce(f, 1)


def two_component_families(count, seed):
    rng = random.Random(seed)
    limit = math.comb(7, 3) / 4
    out = []
    while len(out) < count:
        f = perturbed_star(P94, rng, rng.randint(2, 8), B_from_neighbourhood=True)
        d = decompose(f)
        if not 0 < d.a < limit or d.B.bits & ~graph_of(P94).neighbourhood(d.A.bits):
            continue
        if len(two_linked_components(d.A, d.x)) >= 2 and classify_family(f).inT1:
            out.append(f)
    return out


def test_component_reduce_two_components():
    checked = 0
    for f in two_component_families(30, 3):
        d = decompose(f)
        comps = two_linked_components(d.A, d.x)
        for i, Ai in enumerate(comps):
            try:
                g = component_reduce(f, i)
            except PreconditionError:
                continue
            r = reduction_report(f, g, expect_A=Ai)
            assert all(r.values()), r
            assert mask_edges(g) <= mask_edges(f)
            assert len(g) == len(f)
            checked += 1
    assert checked >= 30


def test_component_reduce_requires_B_in_neighbourhood():
    A = s(P73, 2, 3, 4)
    kg = graph_of(P73)
    f = Family.from_bits(P73, (kg.star_bits[1] & ~(1 << kg.index[s(P73, 1, 2, 3)])) | 1 << kg.index[A])
    with pytest.raises(PreconditionError):
        component_reduce(f, 0)


def test_edge_set_matches_masks():
    rng = random.Random(5)
    kg = graph_of(P73)
    for _ in range(20):
        f = perturbed_star(P73, rng, rng.randint(1, 6))
        assert {(kg.vertices[i], kg.vertices[j]) for i, j in edge_set(f)} == mask_edges(f)


# -- certificates --------------------------------------------------------------------


def petersen_near_star():
    return near_star(P52, 1, s(P52, 2, 3), s(P52, 1, 4))


def test_certificate_golden_near_star():
    f = petersen_near_star()
    c = build_certificate(f, delta=0.5, p1=1.0)
    assert c.Y.labels() == ["14"]
    assert c.A1.labels() == ["25", "35"]
    assert len(c.A2) == 0 and len(c.A3) == 0
    assert c.tries == 1
    split = degree_split(decompose(f), "A", 0.5)
    assert split.high.labels() == ["23"]
    rep = check_certificate(c, f)
    assert rep.ok, rep.witnesses


def test_certificate_p1_one_is_deterministic():
    rng = random.Random(6)
    kg = graph_of(P94)
    for _ in range(10):
        f = random_T1_family(P94, rng, max_a=8)
        d = decompose(f)
        c1 = build_certificate(f, 0.25, p1=1.0, seed=1, max_tries=1)
        c2 = build_certificate(f, 0.25, p1=1.0, seed=99, max_tries=1)
        assert c1.Y == c2.Y == d.B
        split = degree_split(d, "A", 0.25)
        assert c1.A3.bits == split.high.bits & ~kg.neighbourhood(d.B.bits)
        assert check_certificate(c1, f).passed["reconstruction"]


def test_certificate_seeded_reproducible():
    f = random_T1_family(P94, random.Random(7), max_a=8)
    a = build_certificate(f, 0.25, seed=5)
    b = build_certificate(f, 0.25, seed=5)
    assert a.to_dict() == b.to_dict()
    assert a.p1 == default_p1(f, 0.25) == min(0.5, 10 / (0.25 * P94.star_degree))


def test_certificate_mutation_names_witness():
    rng = random.Random(8)
    for _ in range(20):
        f = random_T1_family(P94, rng, max_a=8)
        c = build_certificate(f, 0.25, seed=1)
        d = decompose(f)
        kg = graph_of(P94)
        # drop a member of A3, or add a set that is not high-degree
        high = degree_split(d, "A", 0.25).high.bits
        pool = c.A3.bits or kg.avoid_bits[d.x] & ~high
        victim = pool & -pool
        bad = Certificate(c.side, c.x, c.a, c.delta, c.p1, c.theta, c.slack, c.Y, c.A1, c.A2,
                          Family.from_bits(P94, c.A3.bits ^ victim), c.tries, c.budgets)
        rep = check_certificate(bad, f)
        assert not rep.passed["reconstruction"]
        assert rep.witnesses["reconstruction"]["missing"] or rep.witnesses["reconstruction"]["extra"]


def test_certificate_B_side():
    rng = random.Random(9)
    kg = graph_of(P94)
    for seed in range(20):
        f = random_T1_family(P94, rng, max_a=8)
        c = build_certificate(f, 0.25, side="B", seed=seed)
        d = decompose(f)
        assert c.Y.bits & ~d.A.bits == 0
        assert c.A1.bits & ~kg.star_bits[d.x] == 0
        rep = check_certificate(c, f)
        assert rep.ok, rep.witnesses


def test_certificate_argument_errors():
    f = petersen_near_star()
    for kwargs in ({"delta": 0.0}, {"delta": 0.6}, {"delta": 0.5, "p1": 0.0}, {"delta": 0.5, "p1": 1.5},
                   {"delta": 0.5, "side": "C"}):
        with pytest.raises(ValueError):
            build_certificate(f, **kwargs)
    with pytest.raises(PreconditionError):
        build_certificate(star(P52, 1), 0.5)


def test_certificate_failure_is_distinguishable():
    f = random_T1_family(P94, random.Random(10), min_a=6, max_a=8)
    from kneser_ekr.reductions import CertificateSlack
    # a zero budget for A3 and a tiny p1 cannot be met when high-degree sets exist
    split = degree_split(decompose(f), "A", 0.25)
    if len(split.high) == 0:
        pytest.skip("no high-degree sets in this sample")
    with pytest.raises(CertificateFailure):
        build_certificate(f, 0.25, p1=1e-9, max_tries=3, slack=CertificateSlack(sigma=0.0))
