"""The continuous-time random subgraph process on K(n,k) and its hitting times.

Every edge gets an independent uniform label in [0,1); edges are added in
increasing (label, edge index) order.  ``count`` values are 1-based positions
in that order, i.e. the number of edges present at that moment.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import NamedTuple, Optional

import numpy as np

from .core import Params, graph_of
from .solver import (SampleGraph, alpha, find_independent_set, find_nonstar_independent_set,
                     has_independent_superstar)

_U64 = (1 << 64) - 1


@dataclass(frozen=True, eq=False)
class EdgeLabeling:
    params: Params
    seed: int
    trial: int
    labels: np.ndarray

    @cached_property
    def order(self) -> np.ndarray:
        """Edge indices sorted by (label, index); stable sort keeps index order on ties."""
        return np.argsort(self.labels, kind="stable")

    @cached_property
    def position(self) -> np.ndarray:
        pos = np.empty(len(self.labels), dtype=np.int64)
        pos[self.order] = np.arange(1, len(self.labels) + 1)
        return pos

    def label_at(self, count: int) -> float:
        """Label of the count-th edge added (0.0 for the empty prefix)."""
        return float(self.labels[self.order[count - 1]]) if count > 0 else 0.0


def sample_labels(p: Params, seed: int, trial: int = 0) -> EdgeLabeling:
    """Labels from a Philox stream keyed by (seed, trial); edge t uses stream position t."""
    key = np.array([seed & _U64, trial & _U64], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    labels = gen.random(p.edge_count)
    labels.flags.writeable = False
    return EdgeLabeling(p, seed, trial, labels)


def _bits_of(edge_indices) -> int:
    present = 0
    for t in edge_indices:
        present |= 1 << int(t)
    return present


def snapshot(l: EdgeLabeling, prob: float) -> SampleGraph:
    """Edges whose label is at most prob."""
    if not 0.0 <= prob <= 1.0:
        raise ValueError(f"probability {prob} outside [0, 1]")
    return SampleGraph(l.params, _bits_of(np.flatnonzero(l.labels <= prob)))


def snapshot_at_count(l: EdgeLabeling, i: int) -> SampleGraph:
    """The first i edges of the process."""
    if not 0 <= i <= l.params.edge_count:
        raise ValueError(f"count {i} outside [0, {l.params.edge_count}]")
    return SampleGraph(l.params, _bits_of(l.order[:i]))


@lru_cache(maxsize=None)
def _pair_edges(n: int, k: int) -> np.ndarray:
    """Row per pair (x, A not in K_x): indices of the D Kneser edges from A into K_x."""
    kg = graph_of(Params(n, k))
    rows = []
    for x in range(1, n + 1):
        sb = kg.star_bits[x]
        for a in range(len(kg.vertices)):
            if sb >> a & 1:
                continue
            row = []
            nb = kg.adj[a] & sb
            while nb:
                low = nb & -nb
                b = low.bit_length() - 1
                nb ^= low
                row.append(kg.edge_index[(a, b) if a < b else (b, a)])
            rows.append(row)
    return np.array(rows, dtype=np.int64)


class Hit(NamedTuple):
    count: int
    label: float


def tau_all(l: EdgeLabeling) -> list[Hit]:
    """[tau_1, ..., tau_D] from per-pair order statistics of edge positions."""
    pos = np.sort(l.position[_pair_edges(l.params.n, l.params.k)], axis=1)
    counts = pos.max(axis=0)
    return [Hit(int(c), l.label_at(int(c))) for c in counts]


def tau_ell(l: EdgeLabeling, ell: int) -> Hit:
    D = l.params.star_degree
    if not 1 <= ell <= D:
        raise ValueError(f"ell={ell} outside [1, {D}]")
    pos = np.sort(l.position[_pair_edges(l.params.n, l.params.k)], axis=1)
    c = int(pos[:, ell - 1].max())
    return Hit(c, l.label_at(c))


@dataclass
class HittingTimes:
    tau_super: Hit
    tau_near: Hit
    tau_alpha: Optional[Hit]
    tau_ekr: Optional[Hit]
    tau_ell: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def h(v):
            return None if v is None else {"count": v.count, "label": v.label}
        return {
            "tau_super": h(self.tau_super),
            "tau_near": h(self.tau_near),
            "tau_alpha": h(self.tau_alpha),
            "tau_ekr": h(self.tau_ekr),
            "tau_ell": {str(k): h(v) for k, v in sorted(self.tau_ell.items())},
        }


@dataclass
class TrialRecord:
    seed: int
    trial: int
    hitting: HittingTimes
    alpha_at_tau_super: int
    ekr_at_tau_near: bool
    alpha_equal: bool
    ekr_equal: bool
    checks: dict
    timings: dict

    def to_dict(self, with_timings: bool = False) -> dict:
        d = {
            "seed": self.seed,
            "trial": self.trial,
            "hitting": self.hitting.to_dict(),
            "alpha_at_tau_super": self.alpha_at_tau_super,
            "ekr_at_tau_near": self.ekr_at_tau_near,
            "alpha_equal": self.alpha_equal,
            "ekr_equal": self.ekr_equal,
            "checks": self.checks,
        }
        if with_timings:
            d["timings"] = self.timings
        return d


def _step_until(l: EdgeLabeling, start: int, witness, finder) -> int:
    """Add edges after ``start`` until finder() finds no witness; return that count.

    The property only needs re-solving when a new edge has both ends inside the
    current witness, otherwise the witness stays independent.
    """
    p = l.params
    kg = graph_of(p)
    present = snapshot_at_count(l, start).present
    i = start
    while witness is not None:
        t = int(l.order[i])
        i += 1
        present |= 1 << t
        u, v = kg.edges[t]
        wb = witness.bits
        if wb >> u & 1 and wb >> v & 1:
            witness = finder(SampleGraph(p, present))
    return i


def compute_hitting_times(l: EdgeLabeling, solve_exact: bool = True) -> TrialRecord:
    p = l.params
    N = p.star_size
    timings = {}
    t0 = time.perf_counter()
    taus = tau_all(l)
    t_super, t_near = taus[0], taus[1]
    timings["tau"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    g_super = snapshot_at_count(l, t_super.count)
    res = alpha(g_super)
    alpha_equal = res.value == N
    timings["alpha"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    g_near = snapshot_at_count(l, t_near.count)
    nonstar = find_nonstar_independent_set(g_near, N)
    ekr_equal = nonstar is None
    timings["ekr"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    tau_alpha = t_super if alpha_equal else None
    tau_ekr = t_near if ekr_equal else None
    if solve_exact:
        if not alpha_equal:
            c = _step_until(l, t_super.count, res.witness, lambda g: find_independent_set(g, N + 1))
            tau_alpha = Hit(c, l.label_at(c))
        if not ekr_equal:
            c = _step_until(l, t_near.count, nonstar, lambda g: find_nonstar_independent_set(g, N))
            tau_ekr = Hit(c, l.label_at(c))
    timings["step"] = time.perf_counter() - t0

    ht = HittingTimes(t_super, t_near, tau_alpha, tau_ekr,
                      {i + 1: h for i, h in enumerate(taus)})
    rec = TrialRecord(l.seed, l.trial, ht, res.value, ekr_equal, alpha_equal, ekr_equal, {}, timings)
    rec.checks = check_trial(l, rec)
    return rec


def check_trial(l: EdgeLabeling, rec: TrialRecord) -> dict:
    """Deterministic relations every trial must satisfy, as name -> bool."""
    h = rec.hitting
    s, nr = h.tau_super.count, h.tau_near.count
    checks = {
        "super_lt_near": s < nr,
        "tau_ell_nondecreasing": all(
            h.tau_ell[i].count <= h.tau_ell[i + 1].count for i in range(1, len(h.tau_ell))),
        "tau_1_is_super": h.tau_ell[1] == h.tau_super,
        "tau_2_is_near": h.tau_ell[2] == h.tau_near,
        "superstar_before_tau_super": s >= 1 and has_independent_superstar(snapshot_at_count(l, s - 1)),
        "no_superstar_at_tau_super": not has_independent_superstar(snapshot_at_count(l, s)),
        "flags_consistent": rec.alpha_equal == (rec.alpha_at_tau_super == l.params.star_size),
    }
    if h.tau_alpha is not None:
        checks["super_le_alpha"] = s <= h.tau_alpha.count
        checks["alpha_equal_matches"] = rec.alpha_equal == (h.tau_alpha.count == s)
    if h.tau_ekr is not None:
        checks["near_le_ekr"] = nr <= h.tau_ekr.count
        checks["ekr_equal_matches"] = rec.ekr_equal == (h.tau_ekr.count == nr)
    if h.tau_alpha is not None and h.tau_ekr is not None:
        checks["alpha_le_ekr"] = h.tau_alpha.count <= h.tau_ekr.count
    return checks
