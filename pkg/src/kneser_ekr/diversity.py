"""Distance of a star-sized family from the nearest star, and the statistics built on it.

A family F with |F| = C(n-1,k-1) is written F = A ∪ (K_x \\ B) where x is the
smallest element minimising |F \\ K_x|, A = F \\ K_x and B = K_x \\ F.
Edge counts are always taken in the full Kneser graph.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

from .core import Family, Params, graph_of, iter_bits, popcount
from .thresholds import p0 as threshold_p0

TOL = 1e-9


@dataclass(frozen=True)
class DiversityDecomposition:
    family: Family
    x: int
    A: Family
    B: Family

    @property
    def a(self) -> int:
        return len(self.A)

    @property
    def params(self) -> Params:
        return self.family.params


@dataclass(frozen=True)
class EdgeStats:
    eF: int
    eA: int
    eABbar: int
    eAbarB: int


@dataclass(frozen=True)
class DegreeSplit:
    side: str
    delta: float
    high: Family
    low: Family


def _require_star_size(f: Family):
    if len(f) != f.params.star_size:
        raise ValueError(f"family has {len(f)} members, expected {f.params.star_size}")


def distances_to_stars(f: Family) -> list[int]:
    """[|F \\ K_x| for x = 1..n]."""
    kg = graph_of(f.params)
    return [popcount(f.bits & kg.avoid_bits[x]) for x in range(1, f.params.n + 1)]


def decompose(f: Family) -> DiversityDecomposition:
    _require_star_size(f)
    kg = graph_of(f.params)
    dist = distances_to_stars(f)
    x = dist.index(min(dist)) + 1
    A = Family.from_bits(f.params, f.bits & kg.avoid_bits[x])
    B = Family.from_bits(f.params, kg.star_bits[x] & ~f.bits)
    return DiversityDecomposition(f, x, A, B)


def complement_in_star(d: DiversityDecomposition) -> int:
    """Vertex bits of B-bar = K_x \\ B."""
    return graph_of(d.params).star_bits[d.x] & ~d.B.bits


def complement_outside_star(d: DiversityDecomposition) -> int:
    """Vertex bits of A-bar = (sets avoiding x) \\ A."""
    return graph_of(d.params).avoid_bits[d.x] & ~d.A.bits


def edge_stats(d: DiversityDecomposition) -> EdgeStats:
    kg = graph_of(d.params)
    return EdgeStats(
        eF=kg.edges_within(d.family.bits),
        eA=kg.edges_within(d.A.bits),
        eABbar=kg.edges_between(d.A.bits, complement_in_star(d)),
        eAbarB=kg.edges_between(complement_outside_star(d), d.B.bits),
    )


def degree_split(d: DiversityDecomposition, side: str, delta: float) -> DegreeSplit:
    """Split A by d(A, B) >= delta*C(n-k-1,k-1), or B by d(B, A) >= delta*C(n-k,k)."""
    if not 0 < delta <= 1:
        raise ValueError(f"delta={delta} outside (0, 1]")
    p = d.params
    kg = graph_of(p)
    if side == "A":
        mine, other, full = d.A, d.B, p.star_degree
    elif side == "B":
        mine, other, full = d.B, d.A, p.degree
    else:
        raise ValueError("side must be 'A' or 'B'")
    cut = delta * full - TOL
    high = 0
    for i in iter_bits(mine.bits):
        if popcount(kg.adj[i] & other.bits) >= cut:
            high |= 1 << i
    return DegreeSplit(side, delta, Family.from_bits(p, high), Family.from_bits(p, mine.bits & ~high))


class UnionFind:
    def __init__(self, items):
        self.parent = {v: v for v in items}

    def find(self, v):
        root = v
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[v] != root:
            self.parent[v], v = root, self.parent[v]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the smaller key as root so roots are canonical
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def two_linked_components(A: Family, x: int) -> list[Family]:
    """Components of A in J_x (adjacent iff |A ∪ A'| <= n-k), ordered by smallest member."""
    p = A.params
    xb = 1 << (x - 1)
    if any(m & xb for m in A):
        raise ValueError(f"a member contains x={x}")
    limit = p.n - p.k
    ms = list(A)
    uf = UnionFind(ms)
    for i, a in enumerate(ms):
        for b in ms[i + 1:]:
            if popcount(a | b) <= limit:
                uf.union(a, b)
    groups: dict[int, list[int]] = {}
    for m in ms:
        groups.setdefault(uf.find(m), []).append(m)
    return [Family(p, tuple(g)) for _, g in sorted(groups.items())]


def is_two_linked(A: Family, x: int) -> bool:
    return len(two_linked_components(A, x)) <= 1


def _johnson_neighbours(p: Params, x: int) -> tuple[list[int], list[int]]:
    """Sets avoiding x (in rank order) and their J_x adjacency as index bitsets."""
    kg = graph_of(p)
    sets = kg.masks_of(kg.avoid_bits[x])
    limit = p.n - p.k
    nbr = [0] * len(sets)
    for i, a in enumerate(sets):
        for j, b in enumerate(sets):
            if i != j and popcount(a | b) <= limit:
                nbr[i] |= 1 << j
    return sets, nbr


def count_two_linked_sets(p: Params, x: int, a: int) -> int:
    """Number of a-subsets of the sets avoiding x that are connected in J_x.

    Connected sets are enumerated directly: each is grown from its smallest
    vertex v by adding neighbours larger than v (the ESU scheme), so every
    connected set is produced exactly once.
    """
    if p.n != 2 * p.k + 1:
        raise ValueError("defined for n = 2k+1")
    total = math.comb(p.n - 1, p.k)
    if not 1 <= a <= total:
        raise ValueError(f"a={a} outside [1, {total}]")
    if math.comb(total, a) > 10 ** 7:
        raise ValueError("enumeration guard exceeded")
    _, nbr = _johnson_neighbours(p, x)
    count = 0

    def extend(sub: int, ext: int, size: int, v: int, excl: int):
        nonlocal count
        if size == a:
            count += 1
            return
        while ext:
            low = ext & -ext
            w = low.bit_length() - 1
            ext ^= low
            # new exclusive neighbours of w: larger than v, not in or next to sub
            new = nbr[w] & ~excl & ~((1 << (v + 1)) - 1)
            extend(sub | low, ext | new, size + 1, v, excl | new | nbr[w])

    for v in range(total):
        above = nbr[v] & ~((1 << (v + 1)) - 1)
        extend(1 << v, above, 1, v, nbr[v] | 1 << v)
    return count


def two_linked_count_bound(k: int, a: int) -> float:
    return math.comb(2 * k, k) * (math.e * k * k) ** a


def isoperimetry_holds(A: Family, x: int) -> bool:
    """|N(A) ∩ K_x| > |A| (claimed for nonempty A avoiding x with |A| < C(n-2,k-1))."""
    kg = graph_of(A.params)
    return popcount(kg.neighbourhood(A.bits) & kg.star_bits[x]) > len(A)


@dataclass
class FamilyClassification:
    inT: bool
    inT1: bool
    inT2: bool
    inT3: bool
    inT4: Optional[bool]
    inT5: Optional[bool]
    theta: float
    ratios: dict = field(default_factory=dict)
    log_ratio_bound: Optional[bool] = None

    def to_dict(self) -> dict:
        return {"inT": self.inT, "inT1": self.inT1, "inT2": self.inT2, "inT3": self.inT3,
                "inT4": self.inT4, "inT5": self.inT5, "theta": self.theta,
                "ratios": self.ratios, "log_ratio_bound": self.log_ratio_bound}


def loglog_guard(k: int) -> float:
    return max(math.log(math.log(k)), 0.1)


def classify_family(f: Family, theta: float = 0.01) -> FamilyClassification:
    """Membership in T^1..T^5 plus the measured value of each defining inequality."""
    _require_star_size(f)
    if theta <= 0:
        raise ValueError("theta must be positive")
    d = decompose(f)
    if d.a == 0:
        raise ValueError("classification is for non-star families")
    p = f.params
    kg = graph_of(p)
    st = edge_stats(d)
    a = d.a
    q0 = threshold_p0(p).p0
    outside = math.comb(p.n - 1, p.k)
    log_ratio = math.log(outside / a)

    t1_bound = 5.0 / q0 * a * log_ratio
    in1 = st.eF <= t1_bound + TOL
    covered = d.B.bits & ~kg.neighbourhood(d.A.bits) == 0
    in2 = in1 and covered
    in3 = in2 and is_two_linked(d.A, d.x)

    ratios = {
        "t1": st.eF / t1_bound,
        "eF_p0_over_a_log_ratio": st.eF * q0 / (a * log_ratio),
        "eF_p0_n_over_a_gap_log": st.eF * q0 * p.n / (a * (p.n - 2 * p.k) * math.log(outside)),
    }
    in4 = in5 = None
    if p.k >= 3:
        low = degree_split(d, "A", 1.0 / math.sqrt(p.k)).low
        guard = loglog_guard(p.k)
        ratios["loglog_guard"] = guard
        ratios["t4"] = len(low) * guard / a
        in4 = in1 and len(low) <= a / guard + TOL
        ratios["t5"] = (2 * st.eA / st.eF) if st.eF else 0.0
        in5 = in4 and st.eA <= st.eF / 2 + TOL

    log_bound = None
    if in1:
        lhs = theta / 5 * (p.n - 2 * p.k) / p.n * math.log(outside)
        log_bound = lhs <= log_ratio + TOL
    return FamilyClassification(True, in1, in2, in3, in4, in5, theta, ratios, log_bound)


@dataclass
class ObservationReport:
    passed: dict
    witnesses: dict

    @property
    def ok(self) -> bool:
        return all(self.passed.values())


def check_observations(f: Family) -> ObservationReport:
    """Check the bound on a, the far-from-other-stars property and the edge identity."""
    p = f.params
    d = decompose(f)
    st = edge_stats(d)
    passed, wit = {}, {}

    bound = (p.n - p.k) / p.n * p.star_size
    passed["a_bound"] = d.a <= bound + TOL
    if not passed["a_bound"]:
        wit["a_bound"] = {"a": d.a, "bound": bound}

    far = math.comb(p.n - 2, p.k - 1) - d.a
    bad = [(y, dist) for y, dist in enumerate(distances_to_stars(f), start=1)
           if y != d.x and dist < far]
    passed["other_stars_far"] = not bad
    if bad:
        wit["other_stars_far"] = {"x": d.x, "a": d.a, "violations": bad}

    expect = math.comb(p.n - p.k - 1, p.k) * d.a + st.eABbar
    passed["abar_b_identity"] = st.eAbarB == expect
    passed["edge_partition"] = st.eF == st.eA + st.eABbar
    if not passed["abar_b_identity"]:
        wit["abar_b_identity"] = {"eAbarB": st.eAbarB, "expected": expect}
    if not passed["edge_partition"]:
        wit["edge_partition"] = {"eF": st.eF, "eA": st.eA, "eABbar": st.eABbar}
    return ObservationReport(passed, wit)


def all_star_size_families(p: Params):
    """Every family of star size (only sensible for tiny Params)."""
    kg = graph_of(p)
    for combo in combinations(kg.vertices, p.star_size):
        yield Family(p, combo)
