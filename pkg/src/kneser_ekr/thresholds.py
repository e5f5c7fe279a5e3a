"""Threshold and expectation formulas, Chernoff tails, and exact event probabilities."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from .core import Params
from .solver import (SampleGraph, find_independent_set, has_independent_near_star,
                     has_independent_superstar, is_ekr)

MAX_EXACT_EDGES = 25

EVENTS = (
    "no-independent-superstar",
    "no-independent-near-star",
    "ekr",
    "alpha-equals-star-size",
)


@dataclass(frozen=True)
class ThresholdReport:
    p0: float
    raw: float
    clamped: bool
    D: int


def p0(p: Params) -> ThresholdReport:
    D = p.star_degree
    if p.n == 2 * p.k + 1:
        raw = 0.75
    else:
        raw = math.log(p.n * math.comb(p.n - 1, p.k)) / D
    return ThresholdReport(min(raw, 1.0), raw, raw > 1.0, D)


def _check_prob(prob: float):
    if not 0.0 <= prob <= 1.0:
        raise ValueError(f"probability {prob} outside [0, 1]")


def outside_pairs(p: Params) -> int:
    """Number of pairs (x, A) with A a k-set avoiding x: n * C(n-1, k)."""
    return p.n * math.comb(p.n - 1, p.k)


def expected_superstars(p: Params, prob: float) -> float:
    _check_prob(prob)
    return outside_pairs(p) * (1.0 - prob) ** p.star_degree


class NearStarExpectation(NamedTuple):
    near_star: float
    combined: float


def expected_maximal_nearstars(p: Params, prob: float) -> NearStarExpectation:
    """Expected independent maximal near-stars, and that plus the superstar term."""
    _check_prob(prob)
    D = p.star_degree
    near = outside_pairs(p) * D * prob * (1.0 - prob) ** (D - 1)
    return NearStarExpectation(near, near + expected_superstars(p, prob))


def chernoff_lower(mu: float, alpha: float, weak: bool = False) -> float:
    """Bound on P(X <= alpha*mu) for binomial X with mean mu."""
    if mu < 0 or not 0.0 <= alpha <= 1.0:
        raise ValueError("need mu >= 0 and 0 <= alpha <= 1")
    if weak:
        return math.exp(-(1.0 - 2.0 * math.sqrt(alpha)) * mu)
    alog = alpha * math.log(alpha) if alpha > 0 else 0.0
    return math.exp(-(1.0 - alpha + alog) * mu)


def chernoff_upper(mu: float, beta: float, weak: bool = False) -> float:
    """Bound on P(X >= beta*mu) for binomial X with mean mu."""
    if mu < 0 or not beta > 1.0:
        raise ValueError("need mu >= 0 and beta > 1")
    if weak:
        return math.exp(-mu * beta * math.log(beta / math.e))
    return math.exp(-(1.0 - beta + beta * math.log(beta)) * mu)


def min_degree_delta(p: Params, eps: float) -> float:
    """delta(eps) = eps^2 (1+eps) log(n C(n-1,k)) / (25k), the minimum-degree constant."""
    return eps * eps * (1 + eps) * math.log(outside_pairs(p)) / (25 * p.k)


def event_holds(g: SampleGraph, event: str) -> bool:
    if event == "no-independent-superstar":
        return not has_independent_superstar(g)
    if event == "no-independent-near-star":
        return not has_independent_near_star(g)
    if event == "ekr":
        return is_ekr(g)
    if event == "alpha-equals-star-size":
        return find_independent_set(g, g.params.star_size + 1) is None
    raise ValueError(f"unknown event {event!r}")


def _guard(p: Params):
    if p.edge_count > MAX_EXACT_EDGES:
        raise ValueError(
            f"K({p.n},{p.k}) has {p.edge_count} edges; exact enumeration is limited to {MAX_EXACT_EDGES}")


def _count_range(n: int, k: int, event: str, lo: int, hi: int) -> list[int]:
    p = Params(n, k)
    counts = [0] * (p.edge_count + 1)
    for s in range(lo, hi):
        if event_holds(SampleGraph(p, s), event):
            counts[bin(s).count("1")] += 1
    return counts


@lru_cache(maxsize=None)
def event_counts(n: int, k: int, event: str, workers: int = 1) -> tuple[int, ...]:
    """counts[j] = number of j-edge subgraphs on which ``event`` holds."""
    p = Params(n, k)
    _guard(p)
    if event not in EVENTS:
        raise ValueError(f"unknown event {event!r}")
    total = 1 << p.edge_count
    if workers <= 1:
        return tuple(_count_range(n, k, event, 0, total))
    from concurrent.futures import ProcessPoolExecutor
    step = -(-total // (4 * workers))
    bounds = [(lo, min(lo + step, total)) for lo in range(0, total, step)]
    counts = [0] * (p.edge_count + 1)
    with ProcessPoolExecutor(workers) as ex:
        futs = [ex.submit(_count_range, n, k, event, lo, hi) for lo, hi in bounds]
        for f in futs:  # reduce in shard order
            for j, c in enumerate(f.result()):
                counts[j] += c
    return tuple(counts)


def exact_event_probability(p: Params, prob: float, event: str, workers: int = 1) -> float:
    """Sum over all edge subsets S of prob^|S| (1-prob)^(m-|S|) [event holds on S]."""
    _check_prob(prob)
    _guard(p)
    counts = event_counts(p.n, p.k, event, workers)
    m = p.edge_count
    terms = []
    for j, c in enumerate(counts):
        if c == 0:
            continue
        if prob == 0.0 or prob == 1.0:
            if (prob == 1.0 and j == m) or (prob == 0.0 and j == 0):
                terms.append(float(c))
            continue
        terms.append(math.exp(math.log(c) + j * math.log(prob) + (m - j) * math.log1p(-prob)))
    return math.fsum(terms)
