"""Parameters, k-set encoding, Kneser/Johnson adjacency, named families and shadows.

A k-set of [n] = {1..n} is stored as an int bitmask with bit ``i-1`` standing
for element ``i``.  Colex order on k-sets coincides with numeric order of the
masks, so sorting masks sorts by rank.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Iterable, Iterator

MAX_N = 30


def popcount(m: int) -> int:
    return bin(m).count("1")


def iter_bits(m: int) -> Iterator[int]:
    """Yield the positions (0-based) of set bits, lowest first."""
    while m:
        low = m & -m
        yield low.bit_length() - 1
        m ^= low


def elements(mask: int) -> tuple[int, ...]:
    """1-based elements of a set mask."""
    return tuple(b + 1 for b in iter_bits(mask))


def mask_of(elems: Iterable[int]) -> int:
    m = 0
    for e in elems:
        m |= 1 << (e - 1)
    return m


def set_str(mask: int) -> str:
    """Compact label such as ``'234'`` (comma separated once n > 9)."""
    els = elements(mask)
    if els and els[-1] > 9:
        return "{" + ",".join(map(str, els)) + "}"
    return "".join(map(str, els))


@dataclass(frozen=True)
class Params:
    n: int
    k: int

    def __post_init__(self):
        if self.k < 2 or self.n < 2 * self.k + 1:
            raise ValueError(f"need k >= 2 and n >= 2k+1, got n={self.n}, k={self.k}")
        if self.n > MAX_N:
            raise ValueError(f"n={self.n} exceeds the supported limit {MAX_N}")

    @property
    def vertex_count(self) -> int:
        return math.comb(self.n, self.k)

    @property
    def degree(self) -> int:
        return math.comb(self.n - self.k, self.k)

    @property
    def star_degree(self) -> int:
        """D: neighbours a set outside K_x has inside K_x."""
        return math.comb(self.n - self.k - 1, self.k - 1)

    @property
    def edge_count(self) -> int:
        return self.vertex_count * self.degree // 2

    @property
    def star_size(self) -> int:
        return math.comb(self.n - 1, self.k - 1)

    @property
    def hilton_milner(self) -> int:
        return self.star_size - self.star_degree + 1

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1


def check_kset(p: Params, mask: int) -> int:
    if mask >> p.n or popcount(mask) != p.k:
        raise ValueError(f"{mask:#b} is not a {p.k}-subset of [{p.n}]")
    return mask


def kset(p: Params, elems: Iterable[int]) -> int:
    """Build a k-set from 1-based elements, validating it against ``p``."""
    return check_kset(p, mask_of(elems))


def rank_kset(mask: int) -> int:
    """Colex rank: sum of C(c_i - 1, i) over the sorted elements c_1 < ... < c_k."""
    r = 0
    for i, b in enumerate(iter_bits(mask), start=1):
        r += math.comb(b, i)
    return r


def unrank_kset(p: Params, r: int) -> int:
    if not 0 <= r < p.vertex_count:
        raise ValueError(f"rank {r} out of range [0, {p.vertex_count})")
    mask = 0
    c = p.n
    for i in range(p.k, 0, -1):
        c -= 1
        while math.comb(c, i) > r:
            c -= 1
        r -= math.comb(c, i)
        mask |= 1 << c
    return mask


def kneser_adjacent(a: int, b: int) -> bool:
    return a & b == 0


def johnson_adjacent(p: Params, a: int, b: int, x: int) -> bool:
    """Adjacency in the auxiliary graph J_x: |a ∪ b| <= n - k."""
    xb = 1 << (x - 1)
    if a & xb or b & xb:
        raise ValueError(f"sets passed to johnson_adjacent must avoid x={x}")
    return popcount(a | b) <= p.n - p.k


class KneserGraph:
    """Vertex/edge tables of K(n,k).  Vertex index == colex rank."""

    def __init__(self, p: Params):
        self.params = p
        self.vertices = [unrank_kset(p, r) for r in range(p.vertex_count)]
        self.index = {m: i for i, m in enumerate(self.vertices)}
        self.adj = [0] * len(self.vertices)
        edges = []
        for i, a in enumerate(self.vertices):
            for j in range(i + 1, len(self.vertices)):
                if a & self.vertices[j] == 0:
                    edges.append((i, j))
                    self.adj[i] |= 1 << j
                    self.adj[j] |= 1 << i
        self.edges = edges
        self.edge_index = {e: t for t, e in enumerate(edges)}
        # star_bits[x] / avoid_bits[x]: vertex bitsets of K_x and its complement (x 1-based)
        self.star_bits = [0] * (p.n + 1)
        for i, m in enumerate(self.vertices):
            for b in iter_bits(m):
                self.star_bits[b + 1] |= 1 << i
        everything = (1 << len(self.vertices)) - 1
        self.avoid_bits = [everything & ~s for s in self.star_bits]
        self.all_bits = everything

    def bits_of(self, masks: Iterable[int]) -> int:
        out = 0
        for m in masks:
            out |= 1 << self.index[m]
        return out

    def masks_of(self, bits: int) -> list[int]:
        return [self.vertices[i] for i in iter_bits(bits)]

    def edges_within(self, bits: int) -> int:
        return sum(popcount(self.adj[i] & bits) for i in iter_bits(bits)) // 2

    def edges_between(self, bits1: int, bits2: int) -> int:
        """Edges with one end in each set (the sets are assumed disjoint)."""
        return sum(popcount(self.adj[i] & bits2) for i in iter_bits(bits1))

    def neighbourhood(self, bits: int) -> int:
        out = 0
        for i in iter_bits(bits):
            out |= self.adj[i]
        return out


@lru_cache(maxsize=None)
def kneser_graph(n: int, k: int) -> KneserGraph:
    return KneserGraph(Params(n, k))


def graph_of(p: Params) -> KneserGraph:
    return kneser_graph(p.n, p.k)


def build_edge_list(p: Params) -> list[tuple[int, int]]:
    return list(graph_of(p).edges)


@dataclass(frozen=True)
class Family:
    """A set of k-sets, kept sorted by colex rank."""

    params: Params
    members: tuple[int, ...]

    @classmethod
    def of(cls, p: Params, masks: Iterable[int]) -> "Family":
        ms = sorted(set(masks))
        for m in ms:
            check_kset(p, m)
        return cls(p, tuple(ms))

    @classmethod
    def from_bits(cls, p: Params, bits: int) -> "Family":
        return cls(p, tuple(graph_of(p).masks_of(bits)))

    @cached_property
    def bits(self) -> int:
        return graph_of(self.params).bits_of(self.members)

    @cached_property
    def mask_set(self) -> frozenset[int]:
        return frozenset(self.members)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, m):
        return m in self.mask_set

    def __or__(self, other: "Family") -> "Family":
        return Family.from_bits(self.params, self.bits | other.bits)

    def __and__(self, other: "Family") -> "Family":
        return Family.from_bits(self.params, self.bits & other.bits)

    def __sub__(self, other: "Family") -> "Family":
        return Family.from_bits(self.params, self.bits & ~other.bits)

    def labels(self) -> list[str]:
        return [set_str(m) for m in self.members]

    def __repr__(self):
        return f"Family(n={self.params.n}, k={self.params.k}, {{{' '.join(self.labels())}}})"


def _check_element(p: Params, x: int):
    if not 1 <= x <= p.n:
        raise ValueError(f"element {x} outside [1, {p.n}]")


def star(p: Params, x: int) -> Family:
    _check_element(p, x)
    return Family.from_bits(p, graph_of(p).star_bits[x])


def superstar(p: Params, x: int, a: int) -> Family:
    _check_element(p, x)
    check_kset(p, a)
    if a >> (x - 1) & 1:
        raise ValueError("the extra set of a superstar must avoid x")
    g = graph_of(p)
    return Family.from_bits(p, g.star_bits[x] | 1 << g.index[a])


def near_star(p: Params, x: int, a: int, b: int) -> Family:
    _check_element(p, x)
    check_kset(p, a)
    check_kset(p, b)
    if a >> (x - 1) & 1:
        raise ValueError("the extra set of a near-star must avoid x")
    if not b >> (x - 1) & 1:
        raise ValueError("the removed set of a near-star must contain x")
    g = graph_of(p)
    return Family.from_bits(p, (g.star_bits[x] & ~(1 << g.index[b])) | 1 << g.index[a])


def common_intersection(masks: Iterable[int], n: int) -> int:
    z = (1 << n) - 1
    for m in masks:
        z &= m
    return z


def is_star_contained(f: Family) -> bool:
    return bool(common_intersection(f, f.params.n))


def is_intersecting(f: Family | Iterable[int]) -> bool:
    ms = list(f)
    for i, a in enumerate(ms):
        for b in ms[i + 1:]:
            if a & b == 0:
                return False
    return True


def shadow(f: Iterable[int], ell: int) -> tuple[int, ...]:
    """All ell-sets contained in some member of f, as sorted masks."""
    ms = list(f)
    if not ms:
        raise ValueError("shadow of an empty family")
    k = popcount(ms[0])
    if not 1 <= ell <= k:
        raise ValueError(f"ell={ell} outside [1, {k}]")
    out = set()
    for m in ms:
        for sub in combinations(iter_bits(m), ell):
            out.add(sum(1 << b for b in sub))
    return tuple(sorted(out))


def gen_binom(z: float, j: int) -> float:
    """C(z, j) for real z >= j - 1, via log-gamma."""
    if j == 0:
        return 1.0
    return math.exp(math.lgamma(z + 1) - math.lgamma(j + 1) - math.lgamma(z - j + 1))


def solve_binomial_root(m: int, k: int) -> float:
    """The real z >= k with C(z, k) = m (bisection; C(., k) is increasing there)."""
    if m < 1:
        raise ValueError("family size must be at least 1")
    lo, hi = float(k), float(k + 2 * m)
    target = math.log(m)
    while hi - lo > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        if math.log(gen_binom(mid, k)) < target:
            lo = mid
        else:
            hi = mid
    # the lower end keeps C(z, ell) on the safe side of the true bound
    z = lo
    zi = round(z)
    if abs(z - zi) < 1e-9 * max(1, zi) and math.comb(zi, k) == m:
        return float(zi)
    return z


def lovasz_shadow_bound(m: int, k: int, ell: int) -> float:
    """Lower bound C(z, ell) on the ell-shadow of any m k-sets, where C(z, k) = m."""
    if not 1 <= ell <= k:
        raise ValueError(f"ell={ell} outside [1, {k}]")
    if ell == k:
        return float(m)
    z = solve_binomial_root(m, k)
    if z.is_integer():
        return float(math.comb(int(z), ell))
    return gen_binom(z, ell)
