"""Constructive algorithms and exhaustive searches over coalition structures."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx

from .dynamics import residual_congestion_dynamics
from .game import (
    BasicKind,
    CoalitionStructure,
    classify_basic,
    coalition_utilities,
    coalition_welfare,
    members_of,
    social_welfare,
)
from .graph import WeightedGraph, format_rational
from .partitions import bell, block_partitions
from .stability import (
    DEFAULT_GUARD,
    STRICT,
    GuardExceeded,
    best_response,
    check,
    improving_moves,
    is_k_strong,
)

DEFAULT_CAP = 12


@dataclass
class SolverReport:
    structure: CoalitionStructure
    welfare: Fraction
    certificate: dict[str, bool] = field(default_factory=dict)
    stats: dict = field(default_factory=dict)
    elapsed: float = 0.0  # wall time; kept out of JSON so reports stay reproducible

    def to_json(self) -> dict:
        return {
            "partition": self.structure.to_json(),
            "welfare": format_rational(self.welfare),
            "verified": dict(self.certificate),
            "stats": dict(self.stats),
        }


def _report(g, C, t0, certificate=None, **stats) -> SolverReport:
    return SolverReport(C, social_welfare(g, C), certificate or {}, stats, time.perf_counter() - t0)


def _require_unweighted(g: WeightedGraph, what: str) -> None:
    if not g.is_unweighted:
        raise ValueError(f"{what} requires an unweighted graph")


def _check_cap(g: WeightedGraph, cap: int) -> None:
    if g.n > cap:
        raise GuardExceeded(f"n={g.n} exceeds the enumeration cap {cap} (Bell({g.n}) = {bell(g.n)})")


# -- optimum -------------------------------------------------------------


def brute_force_optimum(g: WeightedGraph, cap: int = DEFAULT_CAP) -> SolverReport:
    """Maximum-welfare partition by enumerating every restricted growth string.

    The first maximiser in enumeration order wins ties.
    """
    _check_cap(g, cap)
    t0 = time.perf_counter()
    n = g.n
    if n == 0:
        return _report(g, CoalitionStructure(()), t0, partitions=1)
    sw = [coalition_welfare(g, m) for m in range(1 << n)]
    masks = [1]
    labels = [0] * n
    best = [None, None, 0]  # welfare, labels, count

    # same order as restricted_growth_strings, but block masks are kept incrementally
    def rec(i: int):
        if i == n:
            best[2] += 1
            total = sum(sw[m] for m in masks)
            if best[0] is None or total > best[0]:
                best[0], best[1] = total, tuple(labels)
            return
        bit = 1 << i
        for lab in range(len(masks)):
            masks[lab] |= bit
            labels[i] = lab
            rec(i + 1)
            masks[lab] ^= bit
        masks.append(bit)
        labels[i] = len(masks) - 1
        rec(i + 1)
        masks.pop()

    rec(1)
    return _report(g, CoalitionStructure(best[1]), t0, partitions=best[2])


def _matching_size(g: WeightedGraph, rest: int) -> int:
    H = nx.Graph()
    for i in members_of(rest):
        for j in g.neighbors(i):
            if j > i and rest >> j & 1:
                H.add_edge(i, j)
    return len(nx.max_weight_matching(H, maxcardinality=True))


def _has_triangle(g: WeightedGraph, rest: int) -> bool:
    for i in members_of(rest):
        nb = g.neighbor_mask(i) & rest
        for j in members_of(nb):
            if j > i and g.neighbor_mask(j) & nb & ~((1 << (j + 1)) - 1):
                return True
    return False


def optimal_basic_partition(g: WeightedGraph) -> SolverReport:
    """Partition of an unweighted graph into K1/K2/K3 coalitions covering as
    many agents as possible with K2s and K3s (which maximises welfare).

    Exact branch and bound. The bound on agents still coverable is
    ``min(non-isolated agents, 2*nu + slack)`` where ``nu`` is the maximum
    matching size and ``slack`` (extra agent per K3) is 0 without triangles.
    """
    _require_unweighted(g, "optimal_basic_partition")
    t0 = time.perf_counter()
    n = g.n
    nbr = [g.neighbor_mask(i) for i in range(n)]
    best_cover = -1
    best_blocks: list[int] = []
    blocks: list[int] = []
    nodes = 0

    def bound(rest: int) -> int:
        live = sum(1 for i in members_of(rest) if nbr[i] & rest)
        if live == 0:
            return 0
        nu = _matching_size(g, rest)
        slack = min(nu, live // 3) if _has_triangle(g, rest) else 0
        return min(live, 2 * nu + slack)

    def rec(rest: int, covered: int):
        nonlocal best_cover, best_blocks, nodes
        nodes += 1
        if not rest:
            if covered > best_cover:
                best_cover, best_blocks = covered, list(blocks)
            return
        if covered + bound(rest) <= best_cover:
            return
        v = (rest & -rest).bit_length() - 1
        rest_v = rest & ~(1 << v)
        nb = [j for j in members_of(nbr[v] & rest_v)]
        for a_idx, a in enumerate(nb):
            for b in nb[a_idx + 1:]:
                if nbr[a] >> b & 1:
                    blocks.append((1 << v) | (1 << a) | (1 << b))
                    rec(rest_v & ~(1 << a) & ~(1 << b), covered + 3)
                    blocks.pop()
        for a in nb:
            blocks.append((1 << v) | (1 << a))
            rec(rest_v & ~(1 << a), covered + 2)
            blocks.pop()
        blocks.append(1 << v)
        rec(rest_v, covered)
        blocks.pop()

    rec((1 << n) - 1, 0)
    C = CoalitionStructure.from_coalitions(n, [members_of(b) for b in best_blocks])
    return _report(g, C, t0, nodes_explored=nodes, covered=best_cover)


# -- strong Nash from the optimum ----------------------------------------


class ConstructionError(RuntimeError):
    """The optimum-to-strong-Nash construction produced a non-stable outcome."""


def strong_nash_from_optimum(
    g: WeightedGraph,
    verify: bool = True,
    guard_limit: int = DEFAULT_GUARD,
) -> SolverReport:
    """Turn an optimal basic partition into an n-strong Nash outcome of equal welfare.

    1. Each K1 agent with an improving move plays its best response; it joins
       some K2 through one endpoint, which becomes that star's anchor.
    2. Anchors and leftovers are propagated along alternating paths: a
       leftover adjacent to a K2 member makes that member an anchor and its
       partner a leftover.
    3. Leftovers then play the singleton congestion game over the anchors
       they are adjacent to (cost = number of leaves on the star), starting
       from the current stars.
    4. The result is checked with the exhaustive k-strong checker (k = n).
    """
    _require_unweighted(g, "strong_nash_from_optimum")
    t0 = time.perf_counter()
    opt = optimal_basic_partition(g)
    C = opt.structure.normalized()
    kinds = {b: classify_basic(g, b) for b in C.blocks}
    partner: dict[int, int] = {}
    for b, kind in kinds.items():
        if kind is BasicKind.K2:
            partner[b[0]], partner[b[1]] = b[1], b[0]
    singles = [b[0] for b, kind in kinds.items() if kind is BasicKind.K1]

    # initial dynamics: K1 agents attach to stars
    for i in singles:
        if improving_moves(g, C, i):
            C = CoalitionStructure(
                [best_response(g, C, i) if a == i else lab for a, lab in enumerate(C.labels)]
            ).normalized()

    anchors: set[int] = set()
    leftovers: list[int] = []
    start: dict[int, int] = {}
    for i in singles:
        mates = [a for a in C.coalition(i) if a != i]
        if not mates:
            continue
        (anchor,) = [a for a in mates if g.has_edge(i, a)]
        anchors.add(anchor)
        leftovers.append(i)
        start[i] = anchor
    queue = sorted(anchors)
    for a in queue:
        y = partner[a]
        if y not in start:
            leftovers.append(y)
            start[y] = a
    seen_left = set(leftovers)
    frontier = list(leftovers)
    while frontier:
        x = frontier.pop(0)
        for a in sorted(g.neighbors(x)):
            if a in partner and a not in anchors and a not in seen_left:
                anchors.add(a)
                y = partner[a]
                if y not in seen_left:
                    seen_left.add(y)
                    leftovers.append(y)
                    start[y] = a
                    frontier.append(y)
    allowed = {x: sorted(a for a in g.neighbors(x) if a in anchors) for x in leftovers}
    assign = residual_congestion_dynamics(sorted(anchors), sorted(leftovers), allowed, start)

    stars: dict[int, list[int]] = {a: [a] for a in anchors}
    for x, a in assign.items():
        stars[a].append(x)
    placed = set(anchors) | set(assign)
    coalitions = list(stars.values())
    for b in C.blocks:
        rest = [a for a in b if a not in placed]
        if rest:
            coalitions.append(rest)
    result = CoalitionStructure.from_coalitions(g.n, coalitions).normalized()
    report = _report(
        g,
        result,
        t0,
        optimum_welfare=format_rational(opt.welfare),
        anchors=len(anchors),
        leftovers=len(leftovers),
    )
    if report.welfare != opt.welfare:
        raise ConstructionError(f"welfare {report.welfare} differs from optimum {opt.welfare}")
    if verify:
        try:
            res = is_k_strong(g, result, max(g.n, 1), STRICT, guard_limit)
        except GuardExceeded:
            report.certificate["kstrong_n"] = None
        else:
            if not res.stable:
                raise ConstructionError(f"outcome {result} is not strong Nash: {res.witness}")
            report.certificate["kstrong_n"] = True
    return report


# -- greedy core ---------------------------------------------------------


def greedy_core(g: WeightedGraph) -> SolverReport:
    """Repeatedly pair the endpoints of the heaviest non-negative edge left.

    Ties go to the lexicographically smallest ``(u, v)``. The selected weights
    are recorded per phase in ``stats["phases"]``.
    """
    t0 = time.perf_counter()
    edges = sorted(((u, v, w) for u, v, w in g.edges() if w >= 0), key=lambda e: (-e[2], e[0], e[1]))
    free = set(range(g.n))
    pairs, phases = [], []
    for u, v, w in edges:
        if u in free and v in free:
            free -= {u, v}
            pairs.append([u, v])
            phases.append({"edge": [u, v], "weight": format_rational(w)})
    C = CoalitionStructure.from_coalitions(g.n, pairs + [[i] for i in sorted(free)]).normalized()
    return _report(g, C, t0, phases=phases)


# -- equilibrium enumeration ---------------------------------------------

KINDS = ("nash", "kstrong", "core", "strict-core")


def _pruner(g: WeightedGraph, kind: str, k: int | None):
    """Veto partial partitions that already violate a necessary condition.

    Only finished blocks are inspected, so every veto is final. Nash-type
    kinds forbid improving moves between finished blocks; core-type kinds and
    k-strong with k >= 2 forbid a blocking pair (or a lone agent with negative
    utility).
    """
    nash_like = kind in ("nash", "kstrong")
    pairs = kind in ("core", "strict-core") or (kind == "kstrong" and k >= 2)
    weak = kind == "strict-core"

    def accept(blocks: list[int], new: int) -> bool:
        new_u = coalition_utilities(g, new)
        if any(u < 0 for u in new_u.values()):
            return False
        if nash_like:
            for b in blocks:
                for a, ua in new_u.items():
                    if coalition_utilities(g, b | (1 << a))[a] > ua:
                        return False
                for a, ua in coalition_utilities(g, b).items():
                    if coalition_utilities(g, new | (1 << a))[a] > ua:
                        return False
        if pairs:
            u = dict(new_u)
            for b in blocks:
                u.update(coalition_utilities(g, b))
            for a, ua in new_u.items():
                for j, w in g.neighbors(a).items():
                    if j not in u:
                        continue
                    uj = u[j]
                    if weak:
                        if w >= ua and w >= uj and (w > ua or w > uj):
                            return False
                    elif w > ua and w > uj:
                        return False
        return True

    return accept


def enumerate_stable(
    g: WeightedGraph,
    kind: str,
    k: int | None = None,
    cap: int = DEFAULT_CAP,
    mode: str = STRICT,
    guard_limit: int = DEFAULT_GUARD,
) -> list[SolverReport]:
    """Every partition passing the stability predicate, in canonical (RGS) order.

    Partitions are built block by block and abandoned as soon as finished
    blocks violate a necessary condition; survivors get the full check.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown stability kind {kind!r}")
    _check_cap(g, cap)
    if kind == "kstrong" and k is None:
        k = max(g.n, 1)
    accept = _pruner(g, kind, k) if mode == STRICT else None
    out = []
    for blocks in block_partitions((1 << g.n) - 1, accept):
        labels = [0] * g.n
        for idx, b in enumerate(sorted(blocks, key=lambda m: m & -m)):
            for a in members_of(b):
                labels[a] = idx
        C = CoalitionStructure(labels)
        if check(g, C, kind, k, mode, guard_limit).stable:
            out.append(C)
    out.sort(key=lambda c: c.labels)
    return [SolverReport(C, social_welfare(g, C), {kind if kind != "kstrong" else f"kstrong_{k}": True}) for C in out]
