"""Acceptance criteria, one function per criterion.

Every criterion returns ``(ok, detail)``; the pytest wrappers assert on it and
a one-line PASS/FAIL summary per criterion is printed at the end of the run.
Run ``python3 tests/test_acceptance.py`` to get the same lines without pytest.
"""

from __future__ import annotations

import random
import subprocess
import sys
import time
from fractions import Fraction as F
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import naive_welfare, random_graph  # noqa: E402
from mfhg.dynamics import CYCLE, run_dynamics  # noqa: E402
from mfhg.experiments import (  # noqa: E402
    INFINITE_DYNAMICS_ORDER,
    InstanceSpec,
    generate,
    infinite_dynamics_start,
    measure_ratios,
)
from mfhg.game import (  # noqa: E402
    CoalitionStructure,
    classify_basic,
    decompose_to_basic,
    format_partition,
    parse_partition,
    social_welfare,
)
from mfhg.graph import WeightedGraph, format_graph, parse_graph  # noqa: E402
from mfhg.partitions import restricted_growth_strings  # noqa: E402
from mfhg.solvers import (  # noqa: E402
    brute_force_optimum,
    enumerate_stable,
    greedy_core,
    optimal_basic_partition,
    strong_nash_from_optimum,
)
from mfhg.stability import (  # noqa: E402
    is_core,
    is_k_strong,
    is_k_strong_by_partitions,
    is_nash,
    is_strict_core,
)

ROOT = Path(__file__).resolve().parent.parent
RESULTS: dict[str, str] = {}


def _timed(budget):
    def wrap(fn):
        def run():
            t0 = time.perf_counter()
            ok, detail = fn()
            dt = time.perf_counter() - t0
            within = dt < budget
            line = f"{detail}; {dt:.2f}s (budget {budget}s)"
            return ok and within, line if within else line + " OVER BUDGET"

        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return wrap


def _all(n):
    return [CoalitionStructure(r) for r in restricted_growth_strings(n)]


# -- 1. non-existence ------------------------------------------------------


@_timed(1)
def c1a():
    """Negative-weight instance: none of the 15 partitions is Nash stable."""
    g = generate(InstanceSpec("negative_no_nash", {"M": 1000}))
    parts = _all(4)
    stable = enumerate_stable(g, "nash")
    scan = [C for C in parts if is_nash(g, C)]
    return len(parts) == 15 and stable == [] and scan == [], f"{len(parts)} partitions, {len(scan)} Nash stable"


@_timed(10)
def c1b():
    """Star (n=7, eps=1/100): no partition is 2-strong stable."""
    g = generate(InstanceSpec("star_eps", {"n": 7, "eps": "1/100"}))
    parts = _all(7)
    scan = [C for C in parts if is_k_strong(g, C, 2)]
    pruned = enumerate_stable(g, "kstrong", 2)
    return len(parts) == 877 and scan == [] and pruned == [], f"{len(parts)} partitions, {len(scan)} 2-strong"


@_timed(1)
def c1c():
    """Path of 3: strict core and relaxed strong Nash are both empty."""
    g = generate(InstanceSpec("path_unweighted", {"n": 3}))
    parts = _all(3)
    sc = [C for C in parts if is_strict_core(g, C)]
    rs = [C for C in parts if is_k_strong(g, C, 3, "relaxed")]
    ok = len(parts) == 5 and not sc and not rs
    ok = ok and enumerate_stable(g, "strict-core") == [] and enumerate_stable(g, "kstrong", 3, mode="relaxed") == []
    return ok, f"{len(parts)} partitions, strict core {len(sc)}, relaxed strong {len(rs)}"


# -- 2. non-convergence ----------------------------------------------------


@_timed(1)
def c2():
    """Scripted run on the dynamics instance cycles back after 12 moves."""
    g = generate(InstanceSpec("infinite_dynamics"))
    C0 = infinite_dynamics_start()
    t = run_dynamics(g, C0, "scripted", script=[(a, None) for a in INFINITE_DYNAMICS_ORDER])
    ok = t.terminal == CYCLE and t.cycle_length == 12 and t.first_repeat == 0 and t.final == C0
    return ok, f"terminal={t.terminal}, cycle_length={t.cycle_length}, back at start={t.final == C0}"


# -- 3. exact values -------------------------------------------------------


@_timed(5)
def c3():
    """Exact welfare values on the path, layered clique and core path instances."""
    checks = {}
    n = 6
    g = generate(InstanceSpec("path_unweighted", {"n": n}))
    sw = social_welfare(g, CoalitionStructure.grand(n))
    checks["path6 grand SW = 2"] = sw == 2 == F(2 * (n - 2) + 2, n - 1)

    k = 3
    g = generate(InstanceSpec("layered_clique", {"k": k}))
    C = CoalitionStructure.from_coalitions(2 * k + 1, [range(k), range(k, 2 * k + 1)])
    checks["layered SW = k+2"] = social_welfare(g, C) == k + 2 == 5
    checks["layered n-strong"] = is_k_strong(g, C, g.n).stable
    checks["layered opt = 2k"] = brute_force_optimum(g).welfare == 2 * k == 6

    g = generate(InstanceSpec("cpos_path", {"eps": "1/10"}))
    checks["greedy SW = 21/10"] = greedy_core(g).welfare == F(21, 10)
    checks["cpos opt = 4"] = brute_force_optimum(g).welfare == 4
    bad = [k for k, v in checks.items() if not v]
    return not bad, f"{len(checks) - len(bad)}/{len(checks)} values exact" + (f", wrong: {bad}" if bad else "")


# -- 4. oracle equivalence -------------------------------------------------


@_timed(300)
def c4():
    """optimal_basic_partition welfare equals brute force on 500 unweighted graphs."""
    rng = random.Random(4)
    mismatches = 0
    for _ in range(500):
        g = random_graph(rng, rng.randint(1, 10), rng.choice([0.15, 0.25, 0.35, 0.5, 0.7]))
        if optimal_basic_partition(g).welfare != brute_force_optimum(g).welfare:
            mismatches += 1
    return mismatches == 0, f"500 instances, {mismatches} mismatches"


# -- 5. constructive results -----------------------------------------------


@_timed(60)
def c5a():
    """decompose_to_basic: basic output, welfare never drops (1000 instances)."""
    rng = random.Random(5)
    bad = 0
    for _ in range(1000):
        n = rng.randint(1, 12)
        g = random_graph(rng, n, rng.choice([0.2, 0.4, 0.6, 0.8]))
        C = CoalitionStructure([rng.randrange(rng.randint(1, n)) for _ in range(n)])
        D = decompose_to_basic(g, C)
        if not all(classify_basic(g, b) is not None for b in D.blocks):
            bad += 1
        elif social_welfare(g, D) < social_welfare(g, C) or naive_welfare(g, D.blocks) != social_welfare(g, D):
            bad += 1
    return bad == 0, f"1000 instances, {bad} violations"


@_timed(600)
def c5b():
    """strong_nash_from_optimum: n-strong stable and optimal (200 instances)."""
    rng = random.Random(55)
    bad = 0
    for _ in range(200):
        g = random_graph(rng, rng.randint(1, 8), rng.choice([0.15, 0.25, 0.35, 0.5]))
        r = strong_nash_from_optimum(g)
        k = max(g.n, 1)
        if r.welfare != brute_force_optimum(g).welfare or not is_k_strong(g, r.structure, k):
            bad += 1
        elif g.n <= 6 and not is_k_strong_by_partitions(g, r.structure, k):
            bad += 1
    return bad == 0, f"200 instances, {bad} violations"


@_timed(600)
def c5c():
    """greedy_core: core stable with half the optimum (500 weighted instances)."""
    rng = random.Random(555)
    weights = [F(k, 2) for k in range(-10, 11)]
    bad = 0
    for _ in range(500):
        g = random_graph(rng, rng.randint(1, 9), rng.choice([0.3, 0.5, 0.7]), weights)
        r = greedy_core(g)
        if not is_core(g, r.structure) or 2 * r.welfare < brute_force_optimum(g).welfare:
            bad += 1
    return bad == 0, f"500 instances, {bad} violations"


# -- 6. bound sweeps -------------------------------------------------------


def _sweep(seed, count, weights, kind, test):
    rng = random.Random(seed)
    violations = checked = 0
    for _ in range(count):
        n = rng.randint(2, 7)
        g = random_graph(rng, n, rng.choice([0.3, 0.5, 0.7]), weights)
        r = measure_ratios(g, kind)
        if not r.exists:
            continue
        checked += 1
        if not test(r, n):
            violations += 1
    return violations, checked


def _exhaustive_unweighted(max_n, kind, test):
    """Every labelled unweighted graph on 2..max_n nodes."""
    violations = checked = 0
    for n in range(2, max_n + 1):
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        for bits in range(1 << len(pairs)):
            g = WeightedGraph(n, [(i, j, 1) for b, (i, j) in enumerate(pairs) if bits >> b & 1])
            r = measure_ratios(g, kind)
            if r.exists:
                checked += 1
                violations += not test(r, n)
    return violations, checked


@_timed(900)
def c6():
    """PoA, SPoA(2), CPoA and CPoS bounds on random instances, PoS on the star."""
    nonneg = [F(k, 2) for k in range(0, 11)]
    unit = [F(1)]
    rows = {
        "PoA<=n-1": _sweep(61, 300, nonneg, "nash", lambda r, n: not r.poa_infinite and r.poa <= n - 1),
        "SPoA(2)<=2": _sweep(62, 300, unit, "kstrong(2)", lambda r, n: not r.poa_infinite and r.poa <= 2),
        "CPoA<=2,CPoS=1": _sweep(63, 300, unit, "core",
                                 lambda r, n: not r.poa_infinite and r.poa <= 2 and r.pos == 1),
        "CPoA<=4,CPoS<=2": _sweep(64, 300, nonneg, "core",
                                  lambda r, n: not r.poa_infinite and r.poa <= 4 and r.pos <= 2),
        "all graphs n<=5 SPoA(2)<=2": _exhaustive_unweighted(5, "kstrong(2)",
                                                           lambda r, n: not r.poa_infinite and r.poa <= 2),
        "all graphs n<=5 CPoA<=2,CPoS=1": _exhaustive_unweighted(
            5, "core", lambda r, n: not r.poa_infinite and r.poa <= 2 and r.pos == 1),
    }
    star_ok = True
    for n in (5, 6, 7):
        eps = F(1, 2 * n)
        r = measure_ratios(generate(InstanceSpec("star_eps", {"n": n, "eps": eps})), "nash")
        star_ok &= r.pos == 2 * (n - 1) / (2 + 2 * (n - 2) * eps)
    violations = sum(v for v, _ in rows.values())
    detail = ", ".join(f"{k}: {v} violations / {c}" for k, (v, c) in rows.items())
    return violations == 0 and star_ok, f"{detail}; star PoS formula exact={star_ok}"


# -- 7. lower-bound trends -------------------------------------------------


@_timed(120)
def c7():
    """Path PoA = n/2 and layered-clique SPoA = 2k/(k+2)."""
    got = {}
    for n in (4, 6, 8):
        r = measure_ratios(generate(InstanceSpec("path_unweighted", {"n": n})), "nash")
        got[f"path n={n}"] = (r.poa, F(n, 2))
    for k in (3, 4, 5):
        r = measure_ratios(generate(InstanceSpec("layered_clique", {"k": k})), "kstrong(n)")
        got[f"layered k={k}"] = (r.poa, F(2 * k, k + 2))
    ok = all(a == b for a, b in got.values())
    return ok, ", ".join(f"{k}: {a}" for k, (a, _) in got.items())


# -- 8. round trips and determinism ----------------------------------------


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "mfhg.cli", *args], capture_output=True, cwd=ROOT).stdout


@_timed(120)
def c8():
    """Files round-trip bit-exactly; repeated CLI runs give identical bytes."""
    rng = random.Random(8)
    trips = 0
    for _ in range(200):
        n = rng.randint(0, 12)
        g = random_graph(rng, n, 0.5, [F(k, 3) for k in range(-9, 10)])
        text = format_graph(g)
        ptext = format_partition(CoalitionStructure([rng.randrange(n) for _ in range(n)]) if n
                                 else CoalitionStructure(()))
        trips += format_graph(parse_graph(text.encode())) == text and format_partition(parse_partition(ptext)) == ptext
    suite = str(ROOT / "suites" / "reference.json")
    runs = [_cli("suite", "--config", suite), _cli("suite", "--config", suite),
            _cli("--jobs", "2", "suite", "--config", suite)]
    gen = [_cli("--seed", "9", "generate", "random-er", "--n", "9", "--weights=-1,1/2,3") for _ in range(2)]
    same = len(set(runs)) == 1 and runs[0].startswith(b"{") and gen[0] == gen[1] and gen[0]
    return trips == 200 and bool(same), f"{trips}/200 round trips, suite and generate output identical={bool(same)}"


CRITERIA = [
    ("1a", c1a), ("1b", c1b), ("1c", c1c), ("2", c2), ("3", c3), ("4", c4),
    ("5a", c5a), ("5b", c5b), ("5c", c5c), ("6", c6), ("7", c7), ("8", c8),
]


@pytest.mark.parametrize("cid,fn", CRITERIA, ids=[c for c, _ in CRITERIA])
def test_criterion(cid, fn):
    ok, detail = fn()
    RESULTS[cid] = f"{'PASS' if ok else 'FAIL'} criterion {cid}: {fn.__doc__.strip()} -- {detail}"
    print(RESULTS[cid])
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for cid, fn in CRITERIA:
        ok, detail = fn()
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'} criterion {cid}: {fn.__doc__.strip()} -- {detail}", flush=True)
    sys.exit(1 if failed else 0)
