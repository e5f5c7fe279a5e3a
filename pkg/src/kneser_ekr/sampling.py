"""Random families of star size, used by the verification suites and experiments."""
from __future__ import annotations

import random
from typing import Optional

from .core import Family, Params, graph_of, iter_bits
from .diversity import classify_family, decompose


def _pick(rng: random.Random, bits: int, count: int) -> int:
    chosen = rng.sample(list(iter_bits(bits)), count)
    out = 0
    for i in chosen:
        out |= 1 << i
    return out


def random_family(p: Params, rng: random.Random) -> Family:
    """Uniformly random family of star size."""
    kg = graph_of(p)
    return Family.from_bits(p, _pick(rng, kg.all_bits, p.star_size))


def perturbed_star(p: Params, rng: random.Random, a: int, x: Optional[int] = None,
                   B_from_neighbourhood: bool = False) -> Family:
    """K_x with a random members swapped for a random sets avoiding x.

    With B_from_neighbourhood the removed members are drawn from N(A) ∩ K_x,
    which puts the result in T2 whenever it is in T1.
    """
    kg = graph_of(p)
    if x is None:
        x = rng.randint(1, p.n)
    A = _pick(rng, kg.avoid_bits[x], a)
    pool = kg.star_bits[x]
    if B_from_neighbourhood:
        pool &= kg.neighbourhood(A)
        if bin(pool).count("1") < a:
            pool = kg.star_bits[x]
    B = _pick(rng, pool, a)
    return Family.from_bits(p, A | (kg.star_bits[x] & ~B))


def random_T1_family(p: Params, rng: random.Random, max_a: int, in_T2: bool = False,
                     min_a: int = 1, attempts: int = 1000) -> Family:
    """A random family in T1 (optionally T2) with min_a <= a <= max_a."""
    for _ in range(attempts):
        a = rng.randint(min_a, max_a)
        f = perturbed_star(p, rng, a, B_from_neighbourhood=in_T2)
        d = decompose(f)
        if not min_a <= d.a <= max_a:
            continue
        c = classify_family(f)
        if c.inT1 and (c.inT2 or not in_T2):
            return f
    raise RuntimeError("could not sample a qualifying family")
