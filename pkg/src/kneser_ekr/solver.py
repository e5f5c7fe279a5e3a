"""Exact independence computations on subgraphs of K(n,k).

The search is a bitset branch-and-bound.  Its main upper bound comes from the
LP relaxation of vertex cover: for the vertex set P still available,
alpha(G[P]) <= |P| - nu/2, where nu is a maximum matching of the bipartite
double cover of G[P] (a maximum fractional matching).  Matchings are grown by
BFS augmenting paths and warm-started from the parent node.  When K(n,k) has
triangles (n >= 3k) a greedy clique-cover bound is also tried.
"""
from __future__ import annotations

import sys
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Optional

from .core import Family, Params, graph_of, iter_bits, popcount

MAX_SOLVER_VERTICES = 512
MAX_BRUTE_FORCE_VERTICES = 24

sys.setrecursionlimit(max(sys.getrecursionlimit(), 10000))


@dataclass(frozen=True)
class SampleGraph:
    """Spanning subgraph of K(n,k): ``present`` has bit t set iff edge t is kept."""

    params: Params
    present: int

    def __post_init__(self):
        if self.present < 0 or self.present >> self.params.edge_count:
            raise ValueError("edge bitset longer than the edge list")

    @classmethod
    def full(cls, p: Params) -> "SampleGraph":
        return cls(p, (1 << p.edge_count) - 1)

    @classmethod
    def empty(cls, p: Params) -> "SampleGraph":
        return cls(p, 0)

    @classmethod
    def from_edges(cls, p: Params, edge_indices: Iterable[int]) -> "SampleGraph":
        present = 0
        for t in edge_indices:
            present |= 1 << t
        return cls(p, present)

    @property
    def num_edges(self) -> int:
        return popcount(self.present)

    @cached_property
    def adj(self) -> list[int]:
        kg = graph_of(self.params)
        if self.present == (1 << self.params.edge_count) - 1:
            return list(kg.adj)
        adj = [0] * len(kg.vertices)
        edges = kg.edges
        for t in iter_bits(self.present):
            i, j = edges[t]
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        return adj

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adj[i] >> j & 1)

    def with_edge(self, t: int) -> "SampleGraph":
        return SampleGraph(self.params, self.present | 1 << t)

    def is_independent(self, bits: int) -> bool:
        adj = self.adj
        return all(adj[v] & bits == 0 for v in iter_bits(bits))


class SolveResult(NamedTuple):
    value: int
    witness: Family


# -- degree tests into stars ---------------------------------------------------

def star_degree_table(g: SampleGraph) -> list[tuple[int, int, int]]:
    """(x, vertex index of A, d_G(A, K_x)) for every pair with A outside K_x."""
    kg = graph_of(g.params)
    adj = g.adj
    out = []
    for x in range(1, g.params.n + 1):
        sb = kg.star_bits[x]
        for a in iter_bits(kg.avoid_bits[x]):
            out.append((x, a, popcount(adj[a] & sb)))
    return out


def min_star_degree(g: SampleGraph) -> int:
    """min over x and A not in K_x of d_G(A, K_x)."""
    return min(d for _, _, d in star_degree_table(g))


def independent_superstar_count(g: SampleGraph) -> int:
    return sum(1 for _, _, d in star_degree_table(g) if d == 0)


def has_independent_superstar(g: SampleGraph) -> bool:
    return min_star_degree(g) == 0


def has_independent_near_star(g: SampleGraph) -> bool:
    # {A} ∪ K_x \ {B} is independent iff every G-neighbour of A in K_x is B
    return min_star_degree(g) <= 1


# -- branch and bound ------------------------------------------------------------

class _Search:
    def __init__(self, g: SampleGraph):
        p = g.params
        kg = graph_of(p)
        if len(kg.vertices) > MAX_SOLVER_VERTICES:
            raise ValueError(f"{len(kg.vertices)} vertices exceeds the solver limit {MAX_SOLVER_VERTICES}")
        self.g = g
        self.adj = g.adj
        self.vmask = kg.vertices
        self.avoid = kg.avoid_bits
        self.n = p.n
        self.use_cliques = p.n >= 3 * p.k
        self.nodes = 0
        self.best = 0
        self.best_set = 0
        self.stop = 0

    def matching(self, P: int, mate: dict, need: int) -> tuple[int, dict]:
        """Matching of the bipartite double cover of G[P] (left u -> right v).

        Augments until the matching is maximum or reaches ``need`` edges, which
        already suffices to prune.  Any matching of size m certifies
        alpha(G[P]) <= |P| - m/2, so a partial one is a valid bound too.
        """
        adj = self.adj
        mate = {u: v for u, v in mate.items() if P >> u & 1 and P >> v & 1}
        if len(mate) >= need:
            return len(mate), mate
        rmate = {v: u for u, v in mate.items()}
        dead = 0  # right vertices proven useless since the last augmentation
        todo = P
        while todo:
            lowu = todo & -todo
            todo ^= lowu
            u = lowu.bit_length() - 1
            if u in mate:
                continue
            seen = dead
            par = {}
            q = deque([u])
            end = -1
            while q:
                x = q.popleft()
                cand = adj[x] & P & ~seen
                seen |= cand
                while cand:
                    low = cand & -cand
                    y = low.bit_length() - 1
                    cand ^= low
                    par[y] = x
                    if y not in rmate:
                        end = y
                        break
                    q.append(rmate[y])
                if end >= 0:
                    break
            if end < 0:
                dead = seen
                continue
            dead = 0
            y = end
            while True:
                x = par[y]
                nxt = mate.get(x)
                mate[x] = y
                rmate[y] = x
                if x == u:
                    break
                y = nxt
            if len(mate) >= need:
                break
        return len(mate), mate

    def clique_cover(self, P: int) -> int:
        """Greedy partition of G[P] into cliques; its size bounds alpha(G[P])."""
        adj = self.adj
        count = 0
        while P:
            low = P & -P
            v = low.bit_length() - 1
            P ^= low
            cand = adj[v] & P
            while cand:
                lw = cand & -cand
                cand &= adj[lw.bit_length() - 1]
                P &= ~lw
                cand &= ~lw
            count += 1
        return count

    def pick(self, cands: int, P: int) -> int:
        adj = self.adj
        best_v, best_d = -1, -1
        for v in iter_bits(cands):
            d = popcount(adj[v] & P)
            if d > best_d:
                best_v, best_d = v, d
        return best_v

    def record(self, cur: int, size: int):
        if size > self.best:
            self.best = size
            self.best_set = cur

    def bounded_out(self, P: int, size: int, mate: dict) -> tuple[bool, dict]:
        free = popcount(P)
        if size + free <= self.best:
            return True, mate
        need = 2 * (size + free - self.best)
        m2, mate = self.matching(P, mate, need)
        if m2 >= need:
            return True, mate
        if self.use_cliques and size + self.clique_cover(P) <= self.best:
            return True, mate
        return False, mate

    def run_alpha(self, P: int, cur: int, size: int, mate: dict):
        if self.best >= self.stop:
            return
        self.nodes += 1
        adj = self.adj
        changed = True
        while changed:
            changed = False
            for v in iter_bits(P):
                if not P >> v & 1:
                    continue
                d = adj[v] & P
                if d & (d - 1) == 0:
                    # degree 0 or 1: some maximum independent set uses v
                    cur |= 1 << v
                    size += 1
                    P &= ~(1 << v) & ~d
                    changed = True
        self.record(cur, size)
        if P == 0:
            return
        pruned, mate = self.bounded_out(P, size, mate)
        if pruned:
            return
        v = self.pick(P, P)
        self.run_alpha(P & ~adj[v] & ~(1 << v), cur | 1 << v, size + 1, dict(mate))
        self.run_alpha(P & ~(1 << v), cur, size, mate)

    def run_nonstar(self, P: int, cur: int, size: int, Z: int, mate: dict):
        """As run_alpha, but only sets with empty common intersection Z count."""
        if self.best >= self.stop:
            return
        if Z == 0 and cur:
            # every extension stays non-star
            self.run_alpha(P, cur, size, mate)
            return
        self.nodes += 1
        adj, vmask = self.adj, self.vmask
        for v in iter_bits(P):
            if adj[v] & P == 0:
                cur |= 1 << v
                size += 1
                P &= ~(1 << v)
                Z &= vmask[v]
        if Z == 0 and cur:
            self.run_alpha(P, cur, size, mate)
            return
        if P == 0:
            return
        for y in iter_bits(Z):
            if P & self.avoid[y + 1] == 0:
                return
        pruned, mate = self.bounded_out(P, size, mate)
        if pruned:
            return
        if cur:
            y = (Z & -Z).bit_length() - 1
            cands = P & self.avoid[y + 1]
        else:
            cands = P
        v = self.pick(cands, P)
        self.run_nonstar(P & ~adj[v] & ~(1 << v), cur | 1 << v, size + 1, Z & vmask[v], dict(mate))
        self.run_nonstar(P & ~(1 << v), cur, size, Z, mate)


def _family(g: SampleGraph, bits: int) -> Family:
    return Family.from_bits(g.params, bits)


def _verify(g: SampleGraph, bits: int, nonstar: bool):
    if not g.is_independent(bits):
        raise AssertionError("solver produced a dependent witness")
    if nonstar:
        z = g.params.full_mask
        for m in graph_of(g.params).masks_of(bits):
            z &= m
        if z or not bits:
            raise AssertionError("solver produced a star-contained witness")


def find_independent_set(g: SampleGraph, target: int) -> Optional[Family]:
    """An independent set of size >= target, or None when none exists."""
    s = _Search(g)
    s.best, s.stop = target - 1, target
    s.run_alpha(graph_of(g.params).all_bits, 0, 0, {})
    if s.best < target:
        return None
    _verify(g, s.best_set, False)
    return _family(g, s.best_set)


def alpha(g: SampleGraph) -> SolveResult:
    """Independence number with a maximum independent set as witness."""
    kg = graph_of(g.params)
    s = _Search(g)
    # any star is independent, so start from one
    s.best, s.best_set = g.params.star_size, kg.star_bits[1]
    s.stop = len(kg.vertices) + 1
    s.run_alpha(kg.all_bits, 0, 0, {})
    _verify(g, s.best_set, False)
    return SolveResult(s.best, _family(g, s.best_set))


def _hilton_milner_like(g: SampleGraph) -> tuple[int, int]:
    """Best non-star of the form {A} ∪ (K_x minus N_G(A)); size star_size + 1 - d_G(A, K_x)."""
    kg = graph_of(g.params)
    x, a, d = min(star_degree_table(g), key=lambda t: t[2])
    bits = (kg.star_bits[x] & ~g.adj[a]) | 1 << a
    return g.params.star_size + 1 - d, bits


def find_nonstar_independent_set(g: SampleGraph, target: int) -> Optional[Family]:
    """A non-star independent set of size >= target, or None when none exists."""
    s = _Search(g)
    size, bits = _hilton_milner_like(g)
    if size >= target:
        _verify(g, bits, True)
        return _family(g, bits)
    s.best, s.stop = target - 1, target
    s.run_nonstar(graph_of(g.params).all_bits, 0, 0, g.params.full_mask, {})
    if s.best < target:
        return None
    _verify(g, s.best_set, True)
    return _family(g, s.best_set)


def max_nonstar_alpha(g: SampleGraph) -> SolveResult:
    """Largest independent set contained in no star, with a witness."""
    kg = graph_of(g.params)
    s = _Search(g)
    s.best, s.best_set = _hilton_milner_like(g)
    s.stop = len(kg.vertices) + 1
    s.run_nonstar(kg.all_bits, 0, 0, g.params.full_mask, {})
    _verify(g, s.best_set, True)
    return SolveResult(s.best, _family(g, s.best_set))


def is_ekr(g: SampleGraph) -> bool:
    """Every maximum independent set is a star, i.e. no non-star reaches star size."""
    return find_nonstar_independent_set(g, g.params.star_size) is None


# -- brute-force oracles -----------------------------------------------------------

def _independent_sets(g: SampleGraph):
    """Yield (bits, size, common intersection) for every nonempty independent set."""
    kg = graph_of(g.params)
    nv = len(kg.vertices)
    if nv > MAX_BRUTE_FORCE_VERTICES:
        raise ValueError(f"{nv} vertices exceeds the brute-force limit {MAX_BRUTE_FORCE_VERTICES}")
    adj, vm = g.adj, kg.vertices
    stack = [(0, 0, g.params.full_mask, 0)]
    while stack:
        bits, size, z, start = stack.pop()
        for v in range(start, nv):
            if adj[v] & bits == 0:
                nb = bits | 1 << v
                nz = z & vm[v]
                yield nb, size + 1, nz
                stack.append((nb, size + 1, nz, v + 1))


def brute_force_alpha(g: SampleGraph) -> int:
    best = 0
    for _, size, _ in _independent_sets(g):
        if size > best:
            best = size
    return best


def brute_force_nonstar_alpha(g: SampleGraph) -> int:
    """Group all independent sets by size and return the largest size holding a non-star."""
    by_size: dict[int, list[int]] = {}
    for _, size, z in _independent_sets(g):
        by_size.setdefault(size, []).append(z)
    for size in sorted(by_size, reverse=True):
        if any(z == 0 for z in by_size[size]):
            return size
    return 0
