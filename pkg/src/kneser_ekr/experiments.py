"""Experiment drivers behind the command line: hitting, sweep, verify, exact, certificate.

Each ``cmd_*`` returns a result dict with ``schema_version``, ``version``,
``config``, ``results``, ``checks`` and ``timings``.  Trials are independent
tasks merged by index, so the output does not depend on the worker count.
Wall-clock timings are only filled in when requested, since they would
otherwise break byte-identical reruns.
"""
from __future__ import annotations

import logging
import math
import random
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Callable, Optional

from scipy.stats import binomtest

from . import __version__
from .core import Family, Params, graph_of, iter_bits, lovasz_shadow_bound, popcount, set_str, shadow
from .diversity import (check_observations, classify_family, count_two_linked_sets, decompose,
                        edge_stats, isoperimetry_holds, two_linked_components,
                        two_linked_count_bound)
from .process import compute_hitting_times, sample_labels, snapshot
from .reductions import (CertificateFailure, CertificateSlack, build_certificate,
                         check_certificate, component_reduce, reduce_to_T2, reduction_report)
from .sampling import random_family, random_T1_family
from .solver import SampleGraph
from .thresholds import EVENTS, MAX_EXACT_EDGES, event_holds, exact_event_probability, p0

SCHEMA_VERSION = 1
log = logging.getLogger("kneser_ekr")


@dataclass
class ExperimentConfig:
    n: int = 5
    k: int = 2
    trials: int = 1000
    seed: int = 0
    p_grid: list = field(default_factory=lambda: [round(0.05 * i, 2) for i in range(21)])
    theta: float = 0.01
    slack: float = 0.5
    max_tries: int = 50
    delta: float = 0.25
    solve_exact: bool = True
    inject_fault: bool = False
    # execution settings, kept out of the echoed config
    workers: int = 1
    out: Optional[str] = None
    format: str = "json"
    timings: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if any(not 0.0 <= q <= 1.0 for q in self.p_grid):
            raise ValueError("p-grid values must lie in [0, 1]")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.format not in ("json", "csv"):
            raise ValueError("format must be json or csv")

    def echo(self) -> dict:
        d = asdict(self)
        for key in ("workers", "out", "format", "timings"):
            d.pop(key)
        return d


def run_tasks(fn: Callable, args: list, workers: int) -> list:
    """fn(*a) for every a in args, results in input order."""
    if workers <= 1 or len(args) <= 1:
        return [fn(*a) for a in args]
    chunk = max(1, len(args) // (8 * workers))
    with ProcessPoolExecutor(workers) as ex:
        return list(ex.map(fn, *zip(*args), chunksize=chunk))


def wilson(successes: int, trials: int) -> dict:
    ci = binomtest(successes, trials).proportion_ci(confidence_level=0.95, method="wilson")
    return {"successes": successes, "trials": trials, "estimate": successes / trials,
            "ci95": [float(ci.low), float(ci.high)]}


def describe(values: list) -> dict:
    qs = statistics.quantiles(values, n=20, method="inclusive") if len(values) > 1 else values * 19
    return {"mean": statistics.fmean(values), "sd": statistics.pstdev(values),
            "min": min(values), "q05": qs[0], "median": statistics.median(values),
            "q95": qs[18], "max": max(values)}


def _record(cfg: ExperimentConfig, results, checks: dict, violations: int, timings: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "command": None,
        "config": cfg.echo(),
        "results": results,
        "checks": {**checks, "violations": violations},
        "timings": timings if cfg.timings else None,
    }


# -- hitting ------------------------------------------------------------------------------

def _hitting_trial(n: int, k: int, seed: int, trial: int, solve_exact: bool) -> dict:
    rec = compute_hitting_times(sample_labels(Params(n, k), seed, trial), solve_exact)
    return rec.to_dict(with_timings=True)


def cmd_hitting(cfg: ExperimentConfig) -> dict:
    p = Params(cfg.n, cfg.k)
    if p.n != 2 * p.k + 1:
        log.warning("n != 2k+1: equality of hitting times is conjectural here")
    t0 = time.perf_counter()
    args = [(p.n, p.k, cfg.seed, t, cfg.solve_exact) for t in range(cfg.trials)]
    trials = run_tasks(_hitting_trial, args, cfg.workers)
    wall = time.perf_counter() - t0

    per_stage: dict = {}
    failures: dict = {}
    for r in trials:
        for key, val in r.pop("timings").items():
            per_stage[key] = per_stage.get(key, 0.0) + val
        for key, ok in r["checks"].items():
            failures.setdefault(key, 0)
            if not ok:
                failures[key] += 1
    q1 = [r["hitting"]["tau_super"]["label"] for r in trials]
    q2 = [r["hitting"]["tau_near"]["label"] for r in trials]
    summary = {
        "params": {"n": p.n, "k": p.k, "star_size": p.star_size, "edge_count": p.edge_count,
                   "p0": p0(p).p0},
        "alpha_equals_super": wilson(sum(r["alpha_equal"] for r in trials), len(trials)),
        "ekr_equals_near": wilson(sum(r["ekr_equal"] for r in trials), len(trials)),
        "q1": describe(q1),
        "q2": describe(q2),
    }
    violations = sum(failures.values())
    out = _record(cfg, {"summary": summary, "trials": trials},
                  {"failures_by_check": failures}, violations,
                  {"wall": wall, "per_stage_total": per_stage})
    out["command"] = "hitting"
    return out


# -- sweep -------------------------------------------------------------------------------

def _sweep_trial(n: int, k: int, seed: int, trial: int, grid: tuple) -> list:
    l = sample_labels(Params(n, k), seed, trial)
    row = []
    for q in grid:
        g = snapshot(l, q)
        row.append((event_holds(g, "alpha-equals-star-size"), event_holds(g, "ekr")))
    return row


def cmd_sweep(cfg: ExperimentConfig) -> dict:
    p = Params(cfg.n, cfg.k)
    grid = tuple(cfg.p_grid)
    t0 = time.perf_counter()
    args = [(p.n, p.k, cfg.seed, t, grid) for t in range(cfg.trials)]
    rows = run_tasks(_sweep_trial, args, cfg.workers)
    exact = p.edge_count <= MAX_EXACT_EDGES
    points = []
    outliers = 0
    for j, q in enumerate(grid):
        pt = {"p": q,
              "alpha_equals_star_size": wilson(sum(r[j][0] for r in rows), len(rows)),
              "ekr": wilson(sum(r[j][1] for r in rows), len(rows))}
        if exact:
            for key, ev in (("alpha_equals_star_size", "alpha-equals-star-size"), ("ekr", "ekr")):
                e = exact_event_probability(p, q, ev)
                se = math.sqrt(e * (1 - e) / len(rows))
                z = abs(pt[key]["estimate"] - e)
                pt[key]["exact"] = e
                pt[key]["within_3se"] = z <= 3 * se + 1e-12
                outliers += not pt[key]["within_3se"]
        points.append(pt)
    # coupled samples: each trial reuses one labeling across the grid, so both
    # events must be monotone along it; the endpoints are deterministic
    order = sorted(range(len(grid)), key=lambda j: grid[j])
    nonmono = sum(1 for r in rows for a, b in zip(order, order[1:])
                  if (r[a][0] and not r[b][0]) or (r[a][1] and not r[b][1]))
    endpoint = 0
    for j, q in enumerate(grid):
        if q == 1.0:
            endpoint += sum(1 for r in rows if not (r[j][0] and r[j][1]))
        if q == 0.0:
            endpoint += sum(1 for r in rows if r[j][0] or r[j][1])
    results = {"p0": asdict(p0(p)), "points": points}
    checks = {"monotonicity_failures": nonmono, "endpoint_failures": endpoint,
              "calibration_outside_3se": outliers if exact else None}
    out = _record(cfg, results, checks, nonmono + endpoint, {"wall": time.perf_counter() - t0})
    out["command"] = "sweep"
    return out


# -- exact -------------------------------------------------------------------------------

def cmd_exact(cfg: ExperimentConfig) -> dict:
    p = Params(cfg.n, cfg.k)
    if p.edge_count > MAX_EXACT_EDGES:
        raise ValueError(f"K({p.n},{p.k}) has {p.edge_count} edges; exact enumeration "
                         f"needs at most {MAX_EXACT_EDGES}")
    t0 = time.perf_counter()
    grid = sorted(cfg.p_grid)
    table = [{"p": q, **{ev: exact_event_probability(p, q, ev, cfg.workers) for ev in EVENTS}}
             for q in grid]
    nonmono = sum(1 for ev in EVENTS for a, b in zip(table, table[1:])
                  if b[ev] < a[ev] - 1e-12)
    order_fail = sum(1 for row in table
                     if row["no-independent-near-star"] > row["no-independent-superstar"] + 1e-12)
    out = _record(cfg, {"edge_count": p.edge_count, "table": table},
                  {"monotonicity_failures": nonmono, "near_exceeds_super": order_fail},
                  nonmono + order_fail, {"wall": time.perf_counter() - t0})
    out["command"] = "exact"
    return out


# -- certificate --------------------------------------------------------------------------

def _certificate_trial(n: int, k: int, seed: int, trial: int, delta: float, sigma: float,
                       max_tries: int, theta: float) -> dict:
    p = Params(n, k)
    rng = random.Random(f"{seed}:{trial}")
    max_a = max(1, math.comb(n - 2, k - 1) // 3)
    f = random_T1_family(p, rng, max_a)
    d = decompose(f)
    row = {"trial": trial, "x": d.x, "a": d.a, "A": d.A.labels(), "B": d.B.labels()}
    try:
        c = build_certificate(f, delta, None, max_tries, seed=rng.getrandbits(63),
                              slack=CertificateSlack(sigma=sigma), theta=theta)
    except CertificateFailure:
        row.update(success=False, tries=max_tries, valid=None)
        return row
    rep = check_certificate(c, f)
    row.update(success=True, tries=c.tries, valid=rep.ok, p1=c.p1, sizes=c.sizes(),
               budgets=c.budgets, witnesses=rep.witnesses)
    return row


def cmd_certificate(cfg: ExperimentConfig) -> dict:
    p = Params(cfg.n, cfg.k)
    t0 = time.perf_counter()
    args = [(p.n, p.k, cfg.seed, t, cfg.delta, cfg.slack, cfg.max_tries, cfg.theta)
            for t in range(cfg.trials)]
    rows = run_tasks(_certificate_trial, args, cfg.workers)
    ok = [r for r in rows if r["success"]]
    invalid = sum(1 for r in ok if not r["valid"])
    results = {"success_rate": wilson(len(ok), len(rows)),
               "mean_tries": statistics.fmean(r["tries"] for r in ok) if ok else None,
               "families": rows}
    out = _record(cfg, results, {"invalid_certificates": invalid}, invalid,
                  {"wall": time.perf_counter() - t0})
    out["command"] = "certificate"
    return out


# -- verify -------------------------------------------------------------------------------

class Suite:
    def __init__(self, name: str):
        self.name = name
        self.checked = 0
        self.violations = 0
        self.witnesses: list = []

    def check(self, ok: bool, witness=None):
        self.checked += 1
        if not ok:
            self.violations += 1
            if len(self.witnesses) < 5:
                self.witnesses.append(witness)

    def to_dict(self) -> dict:
        return {"checked": self.checked, "violations": self.violations, "witnesses": self.witnesses}


def _observation_suite(name: str, families, inject: bool, theta: float, minima: dict) -> Suite:
    s = Suite(name)
    for i, f in enumerate(families):
        rep = check_observations(f)
        passed = dict(rep.passed)
        if inject and i == 0:
            # mutation test: corrupt one count and make sure the identity catches it
            d = decompose(f)
            st = edge_stats(d)
            wrong = st.eAbarB + 1
            passed["abar_b_identity"] = wrong == math.comb(f.params.n - f.params.k - 1, f.params.k) * d.a + st.eABbar
            if not passed["abar_b_identity"]:
                rep.witnesses["abar_b_identity"] = {"eAbarB_injected": wrong, "family": f.labels()}
        c = classify_family(f, theta)
        nested = (not c.inT2 or c.inT1) and (not c.inT3 or c.inT2) and \
            (c.inT4 is None or not c.inT4 or c.inT1) and (c.inT5 is None or not c.inT5 or c.inT4)
        passed["classification_nesting"] = nested
        if c.inT1:
            for key in ("eF_p0_over_a_log_ratio", "eF_p0_n_over_a_gap_log"):
                minima[key] = min(minima.get(key, math.inf), c.ratios[key])
            passed["log_bound"] = bool(c.log_ratio_bound)
        bad = [key for key, ok in passed.items() if not ok]
        s.check(not bad, None if not bad else
                {"family": f.labels(), "failed": bad,
                 "details": {key: rep.witnesses.get(key) for key in bad}})
    return s


def _isoperimetry_suite(name: str, p: Params, samples: Optional[int], rng: random.Random) -> Suite:
    s = Suite(name)
    kg = graph_of(p)
    cap = math.comb(p.n - 2, p.k - 1)
    for x in range(1, p.n + 1):
        outside = list(iter_bits(kg.avoid_bits[x]))
        if samples is None:
            choices = (c for size in range(1, cap) for c in combinations(outside, size))
        else:
            choices = (rng.sample(outside, rng.randint(1, cap - 1)) for _ in range(samples // p.n))
        for c in choices:
            A = Family.from_bits(p, sum(1 << i for i in c))
            s.check(isoperimetry_holds(A, x), {"x": x, "A": A.labels()})
    return s


def _shadow_check(s: Suite, fam: list, k: int):
    for ell in range(1, k + 1):
        size = len(shadow(fam, ell))
        bound = lovasz_shadow_bound(len(fam), k, ell)
        s.check(size >= bound - 1e-9 * bound,
                {"family": [set_str(m) for m in fam], "ell": ell, "shadow": size, "bound": bound})


def _reduction_suite(name: str, p: Params, samples: int, rng: random.Random) -> Suite:
    s = Suite(name)
    cap2 = math.ceil(math.comb(p.n - 2, p.k - 1) / 3) - 1
    cap4 = math.ceil(math.comb(p.n - 2, p.k - 1) / 4) - 1
    for _ in range(samples):
        f = random_T1_family(p, rng, cap2)
        g = reduce_to_T2(f)
        rep = reduction_report(f, g)
        s.check(all(rep.values()), {"family": f.labels(), "report": rep})
        if decompose(g).a <= cap4:
            d = decompose(g)
            for i, comp in enumerate(two_linked_components(d.A, d.x)):
                nb = graph_of(p).neighbourhood(comp.bits) & d.B.bits
                if popcount(nb) > len(comp):
                    continue
                h = component_reduce(g, i)
                rep = reduction_report(g, h, expect_A=comp)
                del rep["B_in_neighbourhood"]
                s.check(all(rep.values()), {"family": g.labels(), "component": i, "report": rep})
    return s


def cmd_verify(cfg: ExperimentConfig) -> dict:
    t0 = time.perf_counter()
    rng = random.Random(cfg.seed)
    suites = []
    minima: dict = {}
    timing = {}

    def timed(fn, *a):
        t = time.perf_counter()
        out = fn(*a)
        timing[out.name] = time.perf_counter() - t
        suites.append(out)

    p52, p73, p94 = Params(5, 2), Params(7, 3), Params(9, 4)
    small = [f for f in (Family(p52, c) for c in combinations(graph_of(p52).vertices, 4))
             if decompose(f).a > 0]
    timed(_observation_suite, "observations_K(5,2)_exhaustive", small, cfg.inject_fault,
          cfg.theta, minima)
    sampled = [f for f in (random_family(p73, rng) for _ in range(cfg.trials)) if decompose(f).a > 0]
    timed(_observation_suite, "observations_K(7,3)_sampled", sampled, False, cfg.theta, minima)
    timed(_isoperimetry_suite, "isoperimetry_K(5,2)_exhaustive", p52, None, rng)
    timed(_isoperimetry_suite, "isoperimetry_K(7,3)_sampled", p73, cfg.trials, rng)

    def shadows_small():
        s = Suite("shadow_3sets_of_7_exhaustive")
        sets = [sum(1 << b for b in c) for c in combinations(range(7), 3)]
        for size in (1, 2, 3):
            for fam in combinations(sets, size):
                _shadow_check(s, list(fam), 3)
        return s

    def shadows_random():
        s = Suite("shadow_n8_random")
        for _ in range(cfg.trials):
            k = rng.randint(2, 5)
            sets = [sum(1 << b for b in c) for c in combinations(range(8), k)]
            _shadow_check(s, rng.sample(sets, rng.randint(1, len(sets))), k)
        return s

    def two_linked():
        s = Suite("two_linked_count_bound")
        for p, top in ((p52, 6), (p73, 3)):
            for a in range(1, top + 1):
                c = count_two_linked_sets(p, 1, a)
                s.check(c <= two_linked_count_bound(p.k, a), {"n": p.n, "k": p.k, "a": a, "count": c})
        return s

    timed(shadows_small)
    timed(shadows_random)
    timed(two_linked)
    timed(_reduction_suite, "reductions_K(7,3)", p73, cfg.trials, rng)
    timed(_reduction_suite, "reductions_K(9,4)", p94, max(1, cfg.trials // 10), rng)

    results = {"suites": {s.name: s.to_dict() for s in suites},
               "theta_feasibility_minima": minima}
    violations = sum(s.violations for s in suites)
    out = _record(cfg, results, {"violations_by_suite": {s.name: s.violations for s in suites}},
                  violations, {"wall": time.perf_counter() - t0, "suites": timing})
    out["command"] = "verify"
    return out


COMMANDS = {
    "hitting": cmd_hitting,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "exact": cmd_exact,
    "certificate": cmd_certificate,
}


def csv_rows(record: dict) -> tuple[list[str], list[list]]:
    """Flatten the per-trial / per-p / per-suite part of a record into a table."""
    cmd = record["command"]
    res = record["results"]
    if cmd == "hitting":
        header = ["trial", "seed", "tau_super", "q1", "tau_near", "q2", "tau_alpha", "tau_ekr",
                  "alpha_at_tau_super", "alpha_equal", "ekr_equal", "checks_ok"]
        rows = []
        for r in res["trials"]:
            h = r["hitting"]
            rows.append([r["trial"], r["seed"], h["tau_super"]["count"], h["tau_super"]["label"],
                         h["tau_near"]["count"], h["tau_near"]["label"],
                         h["tau_alpha"]["count"] if h["tau_alpha"] else "",
                         h["tau_ekr"]["count"] if h["tau_ekr"] else "",
                         r["alpha_at_tau_super"], r["alpha_equal"], r["ekr_equal"],
                         all(r["checks"].values())])
        return header, rows
    if cmd == "sweep":
        header = ["p", "alpha_estimate", "alpha_lo", "alpha_hi", "alpha_exact",
                  "ekr_estimate", "ekr_lo", "ekr_hi", "ekr_exact"]
        rows = []
        for pt in res["points"]:
            a, e = pt["alpha_equals_star_size"], pt["ekr"]
            rows.append([pt["p"], a["estimate"], *a["ci95"], a.get("exact", ""),
                         e["estimate"], *e["ci95"], e.get("exact", "")])
        return header, rows
    if cmd == "exact":
        header = ["p", *EVENTS]
        return header, [[row["p"], *(row[ev] for ev in EVENTS)] for row in res["table"]]
    if cmd == "certificate":
        header = ["trial", "x", "a", "success", "tries", "valid"]
        return header, [[r[h] for h in header] for r in res["families"]]
    header = ["suite", "checked", "violations"]
    return header, [[name, s["checked"], s["violations"]] for name, s in res["suites"].items()]
