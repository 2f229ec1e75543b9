"""Instance generators and exact PoA/PoS-style ratio measurement."""

from __future__ import annotations

import ast
import json
import operator
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .graph import WeightedGraph, format_rational, parse_rational
from .solvers import DEFAULT_CAP, brute_force_optimum, enumerate_stable
from .stability import DEFAULT_GUARD

FAMILIES = (
    "star_eps",
    "layered_clique",
    "path_unweighted",
    "negative_no_nash",
    "infinite_dynamics",
    "cpos_path",
    "random_er",
)


class InstanceError(ValueError):
    pass


def _rat(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise InstanceError(f"expected an integer or 'p/q' string, got {x!r}")


@dataclass
class InstanceSpec:
    family: str
    params: dict[str, Any] = field(default_factory=dict)

    def resolved(self) -> dict[str, Any]:
        """Parameters with defaults filled in and validated."""
        p = dict(self.params)
        f = self.family
        if f not in FAMILIES:
            raise InstanceError(f"unknown family {f!r}")
        if f == "star_eps":
            n = int(p.get("n", 7))
            eps = _rat(p.get("eps", Fraction(1, 2 * n)))
            if n < 3:
                raise InstanceError("star_eps needs n >= 3")
            if not 0 < eps < Fraction(1, n):
                raise InstanceError("star_eps needs 0 < eps < 1/n")
            return {"n": n, "eps": eps}
        if f == "layered_clique":
            k = int(p.get("k", 3))
            if k < 1:
                raise InstanceError("layered_clique needs k >= 1")
            return {"k": k}
        if f == "path_unweighted":
            n = int(p.get("n", 6))
            if n < 1:
                raise InstanceError("path_unweighted needs n >= 1")
            return {"n": n}
        if f == "negative_no_nash":
            M = _rat(p.get("M", 1000))
            if M <= 0:
                raise InstanceError("negative_no_nash needs M > 0")
            return {"M": M}
        if f == "infinite_dynamics":
            return {}
        if f == "cpos_path":
            eps = _rat(p.get("eps", Fraction(1, 8)))
            if eps <= 0:
                raise InstanceError("cpos_path needs eps > 0")
            return {"eps": eps}
        # random_er
        if "seed" not in p:
            raise InstanceError("random_er needs an explicit seed")
        n = int(p.get("n", 6))
        prob = _rat(p.get("p", Fraction(1, 2)))
        weights = [_rat(w) for w in p.get("weights", [1])]
        if n < 0 or not 0 <= prob <= 1 or not weights:
            raise InstanceError("random_er needs n >= 0, 0 <= p <= 1 and a non-empty weight set")
        return {"n": n, "p": prob, "weights": weights, "seed": int(p["seed"])}


def generate(spec: InstanceSpec) -> WeightedGraph:
    p = spec.resolved()
    f = spec.family
    if f == "star_eps":
        # centre 0, heavy leaf 1
        n, eps = p["n"], p["eps"]
        return WeightedGraph(n, [(0, 1, 1)] + [(0, j, eps) for j in range(2, n)])
    if f == "layered_clique":
        # clique 0..k-1, second layer k..2k-1 matched to it, bottom node 2k
        k = p["k"]
        edges = [(a, b, 1) for a in range(k) for b in range(a + 1, k)]
        edges += [(j, k + j, 1) for j in range(k)]
        edges += [(k + j, 2 * k, 1) for j in range(k)]
        return WeightedGraph(2 * k + 1, edges)
    if f == "path_unweighted":
        n = p["n"]
        return WeightedGraph(n, [(i, i + 1, 1) for i in range(n - 1)])
    if f == "negative_no_nash":
        return WeightedGraph(4, [(0, 1, 10), (1, 2, 10), (1, 3, 1), (0, 2, -p["M"])])
    if f == "infinite_dynamics":
        return WeightedGraph(8, [(0, 6, 1), (5, 7, 1)] + [(j, 5, 1) for j in range(5)])
    if f == "cpos_path":
        return WeightedGraph(4, [(0, 1, 1), (1, 2, 1 + p["eps"] / 2), (2, 3, 1)])
    rng = random.Random(p["seed"])
    n, prob, weights = p["n"], p["p"], p["weights"]
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            # exact comparison against a rational threshold
            if Fraction(rng.getrandbits(32), 1 << 32) < prob:
                edges.append((i, j, rng.choice(weights)))
    return WeightedGraph(n, edges)


# Best (unique) improving moves that cycle back to the start on the
# infinite_dynamics instance, starting from {0..6}, {7}.
INFINITE_DYNAMICS_ORDER = (5, 0, 6, 1, 2, 3, 5, 0, 6, 3, 2, 1)


def infinite_dynamics_start():
    from .game import CoalitionStructure

    return CoalitionStructure.from_coalitions(8, [range(7), [7]])


# -- ratios --------------------------------------------------------------


def parse_kind(kind: str, n: int) -> tuple[str, int | None]:
    """``"nash"``, ``"core"``, ``"strict-core"``, ``"kstrong(2)"``, ``"kstrong(n)"``."""
    kind = kind.strip()
    if kind.startswith("kstrong"):
        arg = kind[len("kstrong"):].strip()
        if not arg or arg == "(n)":
            return "kstrong", max(n, 1)
        if arg.startswith("(") and arg.endswith(")") and arg[1:-1].isdigit():
            return "kstrong", min(int(arg[1:-1]), max(n, 1))
        raise InstanceError(f"bad kind {kind!r}")
    if kind in ("nash", "core", "strict-core"):
        return kind, None
    raise InstanceError(f"unknown kind {kind!r}")


@dataclass
class RatioReport:
    kind: str
    n: int
    optimum: Fraction
    count: int
    best: Fraction | None = None
    worst: Fraction | None = None
    poa: Fraction | None = None
    pos: Fraction | None = None
    poa_infinite: bool = False
    pos_infinite: bool = False

    @property
    def exists(self) -> bool:
        return self.count > 0

    def to_json(self) -> dict:
        def r(x, inf):
            return "inf" if inf else (None if x is None else format_rational(x))

        return {
            "kind": self.kind,
            "n": self.n,
            "optimum": format_rational(self.optimum),
            "stable_count": self.count,
            "exists": self.exists,
            "best_stable": r(self.best, False),
            "worst_stable": r(self.worst, False),
            "poa": r(self.poa, self.poa_infinite),
            "pos": r(self.pos, self.pos_infinite),
        }


def _ratio(opt: Fraction, sw: Fraction) -> tuple[Fraction | None, bool]:
    if sw == 0:
        return (Fraction(1), False) if opt == 0 else (None, True)
    return opt / sw, False


def measure_ratios(
    g: WeightedGraph,
    kind: str,
    cap: int = DEFAULT_CAP,
    guard_limit: int = DEFAULT_GUARD,
) -> RatioReport:
    """Optimum over worst / best stable outcome, by exhaustive enumeration.

    A zero-welfare stable outcome gives an infinite ratio unless the optimum
    is zero too, in which case the ratio is 1.
    """
    base, k = parse_kind(kind, g.n)
    opt = brute_force_optimum(g, cap).welfare
    stable = enumerate_stable(g, base, k, cap=cap, guard_limit=guard_limit)
    label = base if base != "kstrong" else f"kstrong({k})"
    rep = RatioReport(label, g.n, opt, len(stable))
    if stable:
        ws = [s.welfare for s in stable]
        rep.best, rep.worst = max(ws), min(ws)
        rep.poa, rep.poa_infinite = _ratio(opt, rep.worst)
        rep.pos, rep.pos_infinite = _ratio(opt, rep.best)
    return rep


# -- suites --------------------------------------------------------------

_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
}


def eval_bound(expr: str | int, env: dict[str, Fraction]) -> Fraction:
    """Evaluate a bound such as ``"2"``, ``"40/7"`` or ``"2*k/(k+2)"`` exactly."""
    if isinstance(expr, int):
        return Fraction(expr)

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return Fraction(node.value)
        if isinstance(node, ast.Name) and node.id in env:
            return Fraction(env[node.id])
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -ev(node.operand)
        raise InstanceError(f"unsupported bound expression {expr!r}")

    return ev(ast.parse(str(expr), mode="eval"))


_CHECKS = {
    "poa_max": ("poa", operator.le),
    "poa_min": ("poa", operator.ge),
    "poa_eq": ("poa", operator.eq),
    "pos_max": ("pos", operator.le),
    "pos_min": ("pos", operator.ge),
    "pos_eq": ("pos", operator.eq),
}


def _expand(entry: dict) -> list[dict]:
    """One suite entry may list several seeds (random family) or values of one parameter."""
    params = entry.get("params", {})
    if "seeds" in entry:
        return [dict(params, seed=s) for s in entry["seeds"]]
    for key, val in params.items():
        if isinstance(val, list) and key != "weights":
            return [dict(params, **{key: v}) for v in val]
    return [dict(params)]


def run_entry(entry: dict, cap: int = DEFAULT_CAP, guard_limit: int = DEFAULT_GUARD) -> list[dict]:
    family = entry.get("family")
    if family not in FAMILIES:
        raise InstanceError(f"unknown family {family!r}")
    kinds = entry.get("kinds", [])
    expect = entry.get("expect", {})
    for key in expect:
        if key not in _CHECKS and key != "exists":
            raise InstanceError(f"unknown expectation {key!r}")
    out = []
    for params in _expand(entry):
        spec = InstanceSpec(family, params)
        resolved = spec.resolved()
        g = generate(spec)
        env = {"n": Fraction(g.n)}
        env.update({k: v for k, v in resolved.items() if isinstance(v, (int, Fraction)) and k != "seed"})
        for kind in kinds:
            parse_kind(kind, g.n)
            rep = measure_ratios(g, kind, cap, guard_limit)
            checks = {}
            for key, bound in expect.items():
                if key == "exists":
                    checks[key] = rep.exists == bool(bound)
                    continue
                attr, op = _CHECKS[key]
                if not rep.exists:
                    checks[key] = True  # vacuous: no stable outcome to compare
                    continue
                val = getattr(rep, attr)
                if getattr(rep, attr + "_infinite"):
                    checks[key] = key.endswith("_min")
                    continue
                checks[key] = op(val, eval_bound(bound, env))
            out.append({
                "family": family,
                "params": {k: (format_rational(v) if isinstance(v, Fraction) else v)
                           for k, v in resolved.items() if k != "weights"}
                | ({"weights": [format_rational(w) for w in resolved["weights"]]}
                   if "weights" in resolved else {}),
                "report": rep.to_json(),
                "checks": checks,
                "pass": all(checks.values()),
            })
    return out


def run_suite(config: list[dict], jobs: int = 1, cap: int = DEFAULT_CAP,
              guard_limit: int = DEFAULT_GUARD) -> dict:
    """Run every suite entry; results keep config order regardless of ``jobs``."""
    if not isinstance(config, list):
        raise InstanceError("suite config must be a JSON array")
    for entry in config:
        if entry.get("family") not in FAMILIES:
            raise InstanceError(f"unknown family {entry.get('family')!r}")
        for kind in entry.get("kinds", []):
            parse_kind(kind, 1)
    if jobs > 1 and len(config) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(run_entry, config, [cap] * len(config), [guard_limit] * len(config)))
    else:
        chunks = [run_entry(e, cap, guard_limit) for e in config]
    results = [r for chunk in chunks for r in chunk]
    passed = sum(r["pass"] for r in results)
    return {
        "results": results,
        "summary": {"total": len(results), "passed": passed, "failed": len(results) - passed},
    }


def load_suite(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
