"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also repeated in the terminal summary.
"""

import itertools
import math
import time
from functools import lru_cache

import numpy as np

from majority_automata.analysis import (
    Rectangle,
    ThresholdsNotEstablished,
    consensus_time_bound,
    is_eternal_set,
    is_robust_set,
    rectangle_distance,
    rectangulate,
    survival_bound,
    threshold_values,
)
from majority_automata.dynamics import BIASED, MAJORITY, CycleNotFound, Generation, run_to_cycle, step
from majority_automata.experiments import ExperimentConfig, TopologySpec, outcome_counts, random_generation, sweep
from majority_automata.topology import Topology, build_cycle, build_lattice
from oracles import robust_by_enumeration


@lru_cache(maxsize=None)
def lattice(n, kind, wrap):
    return build_lattice(n, kind, wrap)


@lru_cache(maxsize=None)
def cycle(n):
    return build_cycle(n)


def random_graph(rng):
    V = int(rng.integers(4, 120))
    p = float(rng.uniform(1.0 / V, min(1.0, 8.0 / V)))
    upper = np.triu(rng.random((V, V)) < p, 1)
    u, v = np.nonzero(upper)
    return Topology.from_edges(V, zip(u.tolist(), v.tolist()))


def periodicity_corpus(total=10_000, seed=2024):
    """Yields (topology, rule, initial generation) over a mixed corpus."""
    rng = np.random.default_rng(seed)
    graphs = [random_graph(rng) for _ in range(100)]
    for k in range(total):
        slot = k % 5
        if slot in (0, 1):
            kind = "neumann" if slot == 0 else "moore"
            t = lattice(int(rng.integers(5, 51)), kind, True)
        elif slot == 2:
            t = lattice(int(rng.integers(5, 51)), ("neumann", "moore")[k % 2], False)
        elif slot == 3:
            t = cycle(int(rng.integers(3, 401)))
        else:
            t = graphs[(k // 5) % 100]
        rule = MAJORITY if (k // 5) % 2 == 0 else BIASED
        g0 = random_generation(t, float(rng.uniform(0.0, 1.0)), int(rng.integers(2**63)))
        yield t, rule, g0


_CORPUS_CACHE = {}


def corpus_outcomes():
    if "runs" not in _CORPUS_CACHE:
        start = time.perf_counter()
        runs = []
        for t, rule, g0 in periodicity_corpus():
            try:
                out = run_to_cycle(t, rule, g0)
                runs.append((t, rule, out.period, out.consensus_time))
            except CycleNotFound:
                runs.append((t, rule, None, None))
        _CORPUS_CACHE["runs"] = runs
        _CORPUS_CACHE["elapsed"] = time.perf_counter() - start
    return _CORPUS_CACHE["runs"], _CORPUS_CACHE["elapsed"]


def test_c01_periodicity(acceptance):
    runs, elapsed = corpus_outcomes()
    bad = [r for r in runs if r[2] not in (1, 2)]
    ok = len(runs) >= 10_000 and not bad and elapsed < 120
    acceptance(1, "periodicity", ok, f"{len(runs)} runs, {len(bad)} with period outside {{1,2}}, {elapsed:.1f}s")


def test_c02_consensus_time_bound(acceptance):
    runs, _ = corpus_outcomes()
    over = [r for r in runs if r[3] is None or r[3] > consensus_time_bound(r[0], r[1]).bound_value]
    acceptance(2, "consensus-time bound", not over, f"{len(runs)} runs, {len(over)} above |E| or |E|+|V|")


def _rows(topology, rule, p_b, trials):
    cfg = ExperimentConfig(topology, rule, p_b, trials)
    start = time.perf_counter()
    summary = sweep(cfg)
    return cfg, summary.rows, time.perf_counter() - start


def test_c03_majority_neumann(acceptance):
    cfg, rows, elapsed = _rows(TopologySpec("torus", 100, "neumann"), "majority", (0.005, 0.5, 0.995), 200)
    low = outcome_counts(cfg, 0.005)["r-monochromatic"]
    fast = sum(1 for t in low if t <= 2)
    ok = (
        fast >= 0.95 * 200
        and rows[1].frac_bichromatic >= 0.95
        and rows[2].frac_b_mono >= 0.95
        and elapsed < 60
    )
    detail = (
        f"r-mono<=2 steps {fast}/200, bichromatic {rows[1].bichromatic}/200, "
        f"b-mono {rows[2].b_mono}/200, {elapsed:.1f}s"
    )
    acceptance(3, "majority/neumann transition", ok, detail)


def test_c04_majority_moore(acceptance):
    cfg, rows, elapsed = _rows(TopologySpec("torus", 200, "moore"), "majority", (0.02, 0.5, 0.98), 100)
    counts = outcome_counts(cfg, 0.02)
    red_fast = sum(1 for t in counts["r-monochromatic"] if t <= 60)
    high = outcome_counts(cfg, 0.98)
    blue_fast = sum(1 for t in high["b-monochromatic"] if t <= 60)
    ok = red_fast >= 90 and rows[1].frac_bichromatic >= 0.9 and blue_fast >= 90 and elapsed < 180
    detail = (
        f"r-mono<=60 steps {red_fast}/100, bichromatic {rows[1].bichromatic}/100, "
        f"b-mono<=60 steps {blue_fast}/100, sweep {elapsed:.1f}s"
    )
    acceptance(4, "majority/moore transition", ok, detail)


def test_c05_biased_neumann(acceptance):
    _, rows, elapsed = _rows(TopologySpec("torus", 100, "neumann"), "biased", (1e-4, 0.05, 0.7), 200)
    ok = (
        rows[0].frac_r_mono >= 0.95
        and rows[1].frac_bichromatic >= 0.9
        and rows[2].frac_b_mono >= 0.9
        and elapsed < 60
    )
    detail = (
        f"r-mono {rows[0].r_mono}/200, bichromatic {rows[1].bichromatic}/200, "
        f"b-mono {rows[2].b_mono}/200, {elapsed:.1f}s"
    )
    acceptance(5, "biased/neumann double transition", ok, detail)


def test_c06_small_clusters_exhaustive(acceptance):
    t = build_lattice(6, "neumann", True)
    start = time.perf_counter()
    total = failures = 0
    for size in (1, 2, 3):
        for cells in itertools.combinations(range(36), size):
            total += 1
            g2 = step(t, MAJORITY, step(t, MAJORITY, Generation.with_blue(36, cells)))
            failures += g2.blue_count != 0
    elapsed = time.perf_counter() - start
    expected = sum(math.comb(36, k) for k in (1, 2, 3))
    ok = total == expected and failures == 0 and elapsed < 30
    acceptance(6, "<=3 blue cells vanish by g2", ok, f"{total} placements, {failures} survivors, {elapsed:.1f}s")


def connected_subsets(t, max_size):
    """All vertex sets up to ``max_size`` that induce a connected subgraph."""
    found = set()
    frontier = {frozenset([v]) for v in range(t.vertex_count)}
    while frontier:
        found |= frontier
        grown = set()
        for s in frontier:
            if len(s) == max_size:
                continue
            for v in s:
                for u in t.neighbors(v).tolist():
                    if u not in s:
                        grown.add(s | {u})
        frontier = grown - found
    return found


def grow_cluster(t, size, rng):
    """A random connected set, grown one neighbor at a time."""
    s = {int(rng.integers(t.vertex_count))}
    while len(s) < size:
        rim = sorted({u for v in s for u in t.neighbors(v).tolist()} - s)
        s.add(rim[int(rng.integers(len(rim)))])
    return s


def _adjacency(t):
    return {v: t.neighbors(v).tolist() for v in range(t.vertex_count)}


def test_c07_robust_oracle(acceptance):
    small = build_lattice(5, "neumann", True)
    adj = _adjacency(small)
    subsets = connected_subsets(small, 5)
    checks = mismatches = 0
    for s in subsets:
        for rule in ("majority", "biased"):
            for c in "BR":
                checks += 1
                mismatches += is_robust_set(small, rule, s, c) != robust_by_enumeration(adj, s, c, rule)
    big = build_lattice(8, "neumann", True)
    adj = _adjacency(big)
    rng = np.random.default_rng(77)
    positives = 0
    for k in range(1000):
        size = int(rng.integers(1, 9))
        if k % 2:
            s = set(rng.choice(64, size=size, replace=False).tolist())
        else:
            s = grow_cluster(big, size, rng)
        for rule in ("majority", "biased"):
            for c in "BR":
                checks += 1
                got = is_robust_set(big, rule, s, c)
                positives += got
                mismatches += got != robust_by_enumeration(adj, s, c, rule)
    ok = mismatches == 0 and positives > 0
    acceptance(
        7, "robust-set oracle equivalence", ok,
        f"{len(subsets)} connected subsets on 5x5 + 1000 random on 8x8, {checks} checks ({positives} robust on 8x8), {mismatches} mismatches",
    )


def test_c08_eternal_pair(acceptance):
    t = build_lattice(4, "neumann", True)
    start = time.perf_counter()
    pair = is_eternal_set(t, BIASED, [t.index(0, 0), t.index(1, 1)], "B")
    single = is_eternal_set(t, BIASED, [t.index(0, 0)], "B")
    elapsed = time.perf_counter() - start
    ok = pair and not single and elapsed < 10
    acceptance(8, "eternal pair certification", ok, f"pair={pair} single={single}, {elapsed:.2f}s")


def test_c09_cycle(acceptance):
    cfg = ExperimentConfig(TopologySpec("cycle", 10_000), "majority", (1e-3, 0.5), 100)
    low = outcome_counts(cfg, 1e-3)
    red = sum(1 for t in low["r-monochromatic"] if t <= 5000)
    high = outcome_counts(cfg, 0.5)
    bi = len(high["bichromatic"])
    ok = red >= 95 and bi >= 95
    acceptance(9, "cycle behavior", ok, f"r-mono<=5000 steps {red}/100, bichromatic {bi}/100")


def _rel(a, b):
    return abs(a - b) / abs(b)


def test_c10_bounds_and_rectangulation(acceptance):
    errs = [
        _rel(survival_bound("disjoint", 100, 2, 0.1).bound_value, math.exp(-1)),
        _rel(survival_bound("disjoint", 50, 3, 1.0).bound_value, math.exp(-50)),
        _rel(survival_bound("azuma", 100, 2, 0.5, [1] * 400).bound_value, math.exp(-100**2 * 0.5**4 / 800)),
    ]
    for got, want in [
        (threshold_values("majority", "neumann", 10**4), (0.01, 0.99)),
        (threshold_values("majority", "moore", 10**6), (0.1, 0.9)),
        (threshold_values("biased", "neumann", 10**4), (1e-4, 1 / math.sqrt(math.log(1e4)))),
    ]:
        errs += [_rel(got[0], want[0]), _rel(got[1], want[1])]
    try:
        threshold_values("biased", "moore", 100)
        refused = False
    except ThresholdsNotEstablished:
        refused = True
    worst = max(errs)

    rng = np.random.default_rng(10)
    violations = 0
    for k in range(10_000):
        n = int(rng.integers(5, 25))
        t = lattice(n, ("neumann", "moore")[k % 2], True)
        m = {
            Rectangle(int(rng.integers(n)), int(rng.integers(n)), int(rng.integers(1, 4)), int(rng.integers(1, 4)))
            for _ in range(int(rng.integers(1, 10)))
        }
        out = rectangulate(t, m)
        if len(out) > 1 and any(rectangle_distance(t, a, b) < 2 for a, b in itertools.combinations(out, 2)):
            violations += 1
    ok = worst <= 1e-9 and refused and violations == 0
    acceptance(
        10, "bound calculators and rectangulation", ok,
        f"max relative error {worst:.1e}, 10000 rectangulations with {violations} violations",
    )
