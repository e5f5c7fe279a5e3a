"""Constructive reductions between families, and certificates for the high-degree part of A.

Both reductions return a family F' whose Kneser edge set is contained in that
of the input, so if F' spans an edge of a sample graph then so does F.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Optional

from .core import Family, graph_of, iter_bits, popcount, set_str
from .diversity import (TOL, DiversityDecomposition, classify_family, decompose, degree_split,
                        edge_stats, two_linked_components)
from .thresholds import p0 as threshold_p0


class PreconditionError(ValueError):
    pass


def edge_set(f: Family) -> set[tuple[int, int]]:
    kg = graph_of(f.params)
    bits = f.bits
    out = set()
    for i in iter_bits(bits):
        for j in iter_bits(kg.adj[i] & bits):
            if i < j:
                out.add((i, j))
    return out


def _fill(kg, required: int, pool: int, size: int) -> int:
    """required plus the lowest-rank members of pool, up to size members."""
    out = required
    extra = pool & ~required
    while popcount(out) < size:
        low = extra & -extra
        if not low:
            raise PreconditionError("not enough neighbours inside the star to fill B'")
        out |= low
        extra ^= low
    return out


def _rebuild(d: DiversityDecomposition, A_bits: int, B_bits: int) -> Family:
    kg = graph_of(d.params)
    return Family.from_bits(d.params, A_bits | (kg.star_bits[d.x] & ~B_bits))


def reduce_to_T2(f: Family) -> Family:
    """Swap B for B' ⊆ N(A) ∩ K_x, keeping the members of B already adjacent to A."""
    d = decompose(f)
    p = f.params
    if d.a == 0:
        raise PreconditionError("f is a star")
    if not d.a < math.comb(p.n - 2, p.k - 1) / 3:
        raise PreconditionError(f"a={d.a} is not below C(n-2,k-1)/3")
    if not classify_family(f).inT1:
        raise PreconditionError("f is not in T1")
    kg = graph_of(p)
    nbr = kg.neighbourhood(d.A.bits) & kg.star_bits[d.x]
    B2 = _fill(kg, nbr & d.B.bits, nbr, d.a)
    return _rebuild(d, d.A.bits, B2)


def component_reduce(f: Family, component: int) -> Family:
    """Keep one 2-linked component A_i of A and a matching B' ⊆ N(A_i) ∩ K_x."""
    d = decompose(f)
    p = f.params
    kg = graph_of(p)
    if d.a == 0:
        raise PreconditionError("f is a star")
    if not d.a < math.comb(p.n - 2, p.k - 1) / 4:
        raise PreconditionError(f"a={d.a} is not below C(n-2,k-1)/4")
    if d.B.bits & ~kg.neighbourhood(d.A.bits):
        raise PreconditionError("B is not contained in N(A)")
    if not classify_family(f).inT1:
        raise PreconditionError("f is not in T1")
    comps = two_linked_components(d.A, d.x)
    if not 0 <= component < len(comps):
        raise IndexError(f"component {component} outside [0, {len(comps)})")
    Ai = comps[component]
    nbr = kg.neighbourhood(Ai.bits) & kg.star_bits[d.x]
    keep = nbr & d.B.bits
    if popcount(keep) > len(Ai):
        raise PreconditionError("component has more neighbours in B than members")
    B2 = _fill(kg, keep, nbr, len(Ai))
    return _rebuild(d, Ai.bits, B2)


def reduction_report(before: Family, after: Family, expect_A: Optional[Family] = None) -> dict:
    """Postconditions of a reduction: edge containment, base element and A."""
    d0, d1 = decompose(before), decompose(after)
    kg = graph_of(before.params)
    A_target = d0.A if expect_A is None else expect_A
    return {
        "edges_contained": edge_set(after) <= edge_set(before),
        "x_preserved": d1.x == d0.x,
        "A_expected": d1.A == A_target,
        "B_in_neighbourhood": d1.B.bits & ~kg.neighbourhood(d1.A.bits) == 0,
    }


# -- certificates -------------------------------------------------------------------


@dataclass(frozen=True)
class CertificateSlack:
    sigma: float = 0.5  # |A3| <= sigma * a
    a1_factor: float = 3.0  # multiplier on the |A1| budget


@dataclass
class Certificate:
    side: str
    x: int
    a: int
    delta: float
    p1: float
    theta: float
    slack: CertificateSlack
    Y: Family
    A1: Family
    A2: Family
    A3: Family
    tries: int
    budgets: dict = field(default_factory=dict)

    def sizes(self) -> dict:
        return {"Y": len(self.Y), "A1": len(self.A1), "A2": len(self.A2), "A3": len(self.A3)}

    def to_dict(self) -> dict:
        return {
            "side": self.side, "x": self.x, "a": self.a, "delta": self.delta, "p1": self.p1,
            "theta": self.theta, "tries": self.tries, "sizes": self.sizes(), "budgets": self.budgets,
            "Y": self.Y.labels(), "A1": self.A1.labels(), "A2": self.A2.labels(), "A3": self.A3.labels(),
        }


def default_p1(f: Family, delta: float, side: str = "A") -> float:
    p = f.params
    D = p.star_degree if side == "A" else p.degree
    return min(0.5, 10.0 / (delta * D))


def _budgets(d: DiversityDecomposition, side: str, delta: float, p1: float, theta: float,
             slack: CertificateSlack) -> dict:
    p = d.params
    a = d.a
    q0 = threshold_p0(p).p0
    outside = math.comb(p.n - 1, p.k)
    lr = a * math.log(outside / a)
    b = {"Y": 3 * a * p1, "rest": a, "part3": slack.sigma * a}
    if side == "A":
        b["part1"] = slack.a1_factor * (p1 / q0) * (30 * p.n / (theta * p.k)) * lr
        b["part2"] = 10 / math.log(outside) * lr
    else:
        st = edge_stats(d)
        b["part1"] = slack.a1_factor * 15 * (p1 / q0) * lr
        edges_into_B = math.comb(p.n - p.k - 1, p.k) * a + st.eABbar
        b["part2"] = edges_into_B / ((1 - delta) * p.degree)
    return b


def _sides(d: DiversityDecomposition, side: str):
    """(pool sampled from, target side, universe for part 1)."""
    kg = graph_of(d.params)
    if side == "A":
        return d.B, d.A, kg.avoid_bits[d.x]
    return d.A, d.B, kg.star_bits[d.x]


def build_certificate(f: Family, delta: float, p1: Optional[float] = None, max_tries: int = 50,
                      seed: int = 0, slack: CertificateSlack = CertificateSlack(),
                      theta: float = 0.01, side: str = "A") -> Certificate:
    """Sample Y from the opposite side until every size budget holds.

    Side "A" certifies A^{>=delta} with Y ⊆ B; side "B" certifies B^{>=delta}
    with Y ⊆ A.  Raises CertificateFailure after max_tries unsuccessful tries.
    """
    if not 0 < delta <= 0.5:
        raise ValueError(f"delta={delta} outside (0, 1/2]")
    if p1 is None:
        p1 = default_p1(f, delta, side)
    if not 0 < p1 <= 1:
        raise ValueError(f"p1={p1} outside (0, 1]")
    if side not in ("A", "B"):
        raise ValueError("side must be 'A' or 'B'")
    d = decompose(f)
    if d.a == 0:
        raise PreconditionError("f is a star")
    if not classify_family(f, theta).inT1:
        raise PreconditionError("f is not in T1")
    p = f.params
    kg = graph_of(p)
    split = degree_split(d, side, delta)
    pool, target, universe = _sides(d, side)
    budgets = _budgets(d, side, delta, p1, theta, slack)
    rng = random.Random(seed)
    pool_idx = list(iter_bits(pool.bits))
    for attempt in range(1, max_tries + 1):
        Y = 0
        for i in pool_idx:
            if rng.random() < p1:
                Y |= 1 << i
        NY = kg.neighbourhood(Y) & universe
        A1 = NY & ~target.bits
        A2 = NY & ~A1 & split.low.bits
        A3 = split.high.bits & ~NY
        sizes = {"Y": popcount(Y), "part1": popcount(A1), "rest": popcount(NY & ~A1),
                 "part2": popcount(A2), "part3": popcount(A3)}
        if all(sizes[key] <= budgets[key] + TOL for key in sizes):
            parts = [Family.from_bits(p, bits) for bits in (Y, A1, A2, A3)]
            return Certificate(side, d.x, d.a, delta, p1, theta, slack, *parts, attempt, budgets)
    raise CertificateFailure(f"no certificate within {max_tries} tries")


class CertificateFailure(RuntimeError):
    pass


@dataclass
class CertificateReport:
    passed: dict
    witnesses: dict

    @property
    def ok(self) -> bool:
        return all(self.passed.values())


def check_certificate(c: Certificate, f: Family) -> CertificateReport:
    """Re-derive everything from f and check the five certificate properties."""
    p = f.params
    kg = graph_of(p)
    d = decompose(f)
    passed, wit = {}, {}
    if d.x != c.x or d.a != c.a:
        return CertificateReport({"matches_family": False}, {"matches_family": {"x": d.x, "a": d.a}})
    pool, target, universe = _sides(d, c.side)
    split = degree_split(d, c.side, c.delta)
    budgets = _budgets(d, c.side, c.delta, c.p1, c.theta, c.slack)
    Y, A1, A2, A3 = c.Y.bits, c.A1.bits, c.A2.bits, c.A3.bits
    NY = kg.neighbourhood(Y) & universe

    passed["Y_subset"] = Y & ~pool.bits == 0
    passed["Y_size"] = popcount(Y) <= budgets["Y"] + TOL
    passed["part1_in_N"] = A1 & ~NY == 0
    passed["part1_size"] = popcount(A1) <= budgets["part1"] + TOL
    passed["rest_size"] = popcount(NY & ~A1) <= budgets["rest"] + TOL
    passed["part2_in_rest"] = A2 & ~(NY & ~A1) == 0
    passed["part2_size"] = popcount(A2) <= budgets["part2"] + TOL
    passed["part3_in_universe"] = A3 & ~universe == 0
    passed["part3_size"] = popcount(A3) <= budgets["part3"] + TOL
    rebuilt = (NY & ~(A1 | A2)) | A3
    passed["reconstruction"] = rebuilt == split.high.bits
    if not passed["reconstruction"]:
        wit["reconstruction"] = {
            "missing": [set_str(m) for m in kg.masks_of(split.high.bits & ~rebuilt)],
            "extra": [set_str(m) for m in kg.masks_of(rebuilt & ~split.high.bits)],
        }
    for key, ok in passed.items():
        if not ok and key not in wit:
            wit[key] = {"sizes": {"Y": popcount(Y), "part1": popcount(A1), "part2": popcount(A2),
                                  "part3": popcount(A3)}, "budgets": budgets}
    return CertificateReport(passed, wit)
