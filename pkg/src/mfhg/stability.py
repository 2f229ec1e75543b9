"""Exact stability predicates (Nash, k-strong, core, strict core) with witnesses.

All checks are exhaustive over the relevant deviation space; they are meant
as ground-truth oracles on small instances.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import comb
from typing import NamedTuple, Sequence

from .game import (
    CoalitionStructure,
    _check_partition,
    coalition_utilities,
    mask_of,
    members_of,
    utilities,
    utility_in,
)
from .graph import WeightedGraph, format_rational
from .partitions import block_partitions, restricted_growth_strings, rgs_blocks

DEFAULT_GUARD = 10**8

STRICT = "strict"
RELAXED = "relaxed"


class GuardExceeded(RuntimeError):
    """The exhaustive search would exceed the configured size limit."""


@dataclass(frozen=True)
class DeviationWitness:
    kind: str  # "unilateral" | "joint" | "blocking"
    agents: tuple[int, ...]
    targets: tuple[int, ...]
    before: tuple[Fraction, ...]
    after: tuple[Fraction, ...]

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "agents": list(self.agents),
            "targets": list(self.targets),
            "before": [format_rational(x) for x in self.before],
            "after": [format_rational(x) for x in self.after],
        }


class StabilityResult(NamedTuple):
    stable: bool
    witness: DeviationWitness | None = None

    def __bool__(self):
        return self.stable


def utility_caps(g: WeightedGraph) -> list[Fraction]:
    """Best utility each agent could get in any outcome: max(0, heaviest incident edge)."""
    caps = g._cache.get("caps")
    if caps is None:
        caps = [max([Fraction(0), *g.neighbors(i).values()]) for i in range(g.n)]
        g._cache["caps"] = caps
    return caps


# -- unilateral moves ----------------------------------------------------


def move_targets(C: CoalitionStructure, i: int) -> list[int]:
    """Labels agent ``i`` may move to: other non-empty coalitions in canonical
    order, then one representative empty coalition (if leaving changes anything)."""
    own = C.labels[i]
    out = [lab for lab in C.canonical_labels() if lab != own]
    if C.labels.count(own) > 1:
        out.append(C.free_labels()[0])
    return out


def improving_moves(g: WeightedGraph, C: CoalitionStructure, i: int) -> list[tuple[int, Fraction]]:
    _check_partition(g, C)
    masks = C.label_masks()
    current = utility_in(g, masks[C.labels[i]], i)
    bit = 1 << i
    out = []
    for lab in move_targets(C, i):
        u = utility_in(g, masks.get(lab, 0) | bit, i)
        if u > current:
            out.append((lab, u))
    return out


def best_response(g: WeightedGraph, C: CoalitionStructure, i: int) -> int:
    _check_partition(g, C)
    masks = C.label_masks()
    best_lab = C.labels[i]
    best_u = utility_in(g, masks[best_lab], i)
    bit = 1 << i
    for lab in move_targets(C, i):
        u = utility_in(g, masks.get(lab, 0) | bit, i)
        if u > best_u:
            best_lab, best_u = lab, u
    return best_lab


def is_nash(g: WeightedGraph, C: CoalitionStructure) -> StabilityResult:
    _check_partition(g, C)
    masks = C.label_masks()
    for i in range(g.n):
        moves = improving_moves(g, C, i)
        if moves:
            lab, u = moves[0]
            before = utility_in(g, masks[C.labels[i]], i)
            return StabilityResult(False, DeviationWitness("unilateral", (i,), (lab,), (before,), (u,)))
    return StabilityResult(True)


# -- joint deviations ----------------------------------------------------


def _check_k(g: WeightedGraph, k: int) -> None:
    if not 1 <= k <= max(g.n, 1):
        raise ValueError(f"k must be in [1, {g.n}], got {k}")


def _check_mode(mode: str) -> None:
    if mode not in (STRICT, RELAXED):
        raise ValueError(f"mode must be 'strict' or 'relaxed', got {mode!r}")


def deviation_space_size(n_candidates: int, n_coalitions: int, k: int) -> int:
    """Upper bound on labelled joint deviations of at most ``k`` of the candidates."""
    return sum(comb(n_candidates, s) * (n_coalitions + s) ** s for s in range(1, k + 1))


def is_k_strong(
    g: WeightedGraph,
    C: CoalitionStructure,
    k: int,
    mode: str = STRICT,
    guard_limit: int = DEFAULT_GUARD,
) -> StabilityResult:
    """Is ``C`` immune to joint deviations by at most ``k`` agents?

    strict: a deviation counts if every deviator strictly gains.
    relaxed: every deviator weakly gains and at least one strictly.

    Agents already at their utility cap can never strictly gain, so in strict
    mode only the others are considered as deviators. Deviator sets are scanned
    by size then lexicographically; for each set, the coalitions receiving
    deviators are filled one at a time in canonical order, then the remaining
    deviators are split into fresh coalitions.
    """
    _check_partition(g, C)
    _check_k(g, k)
    _check_mode(mode)
    n = g.n
    us = utilities(g, C)
    caps = utility_caps(g)
    can_gain = [us[i] < caps[i] for i in range(n)]
    strict = mode == STRICT
    candidates = [i for i in range(n) if can_gain[i]] if strict else list(range(n))
    if not any(can_gain):
        return StabilityResult(True)

    order = C.canonical_labels()
    masks = C.label_masks()
    if deviation_space_size(len(candidates), len(order), k) > guard_limit:
        raise GuardExceeded(
            f"k-strong search over {len(candidates)} candidate deviators exceeds guard {guard_limit}"
        )

    def gains(mask: int, group: Sequence[int]) -> tuple[bool, bool]:
        util = coalition_utilities(g, mask)
        any_strict = False
        for a in group:
            if util[a] > us[a]:
                any_strict = True
            elif strict or util[a] < us[a]:
                return False, False
        return True, any_strict

    for size in range(1, min(k, len(candidates)) + 1):
        for K in combinations(candidates, size):
            if not strict and not any(can_gain[a] for a in K):
                continue
            found = _search_groups(g, C, K, order, masks, gains, strict)
            if found is not None:
                return StabilityResult(False, _joint_witness(g, C, us, found))
    return StabilityResult(True)


def _search_groups(g, C, K, order, masks, gains, strict):
    """Place the deviators ``K`` into existing coalitions, then fresh ones.

    Returns a list of ``(host label or None, group mask)`` or None.
    """
    kmask = mask_of(K)
    bases = [(lab, masks[lab] & ~kmask) for lab in order]
    placed: list[tuple[int | None, int]] = []

    def fresh(rest: int, any_strict: bool):
        def accept(_blocks, block):
            return gains(block, members_of(block))[0]

        for blocks in block_partitions(rest, accept):
            if strict or any_strict or any(gains(b, members_of(b))[1] for b in blocks):
                return [(None, b) for b in blocks]
        return None

    def rec(t: int, rest: int, any_strict: bool):
        if t == len(bases):
            if not rest:
                return list(placed) if (strict or any_strict) else None
            tail = fresh(rest, any_strict)
            return None if tail is None else list(placed) + tail
        lab, base = bases[t]
        eligible = rest & ~masks[lab]
        # empty group first: the coalition receives nobody
        sub = 0
        while True:
            if sub:
                ok, st = gains(base | sub, members_of(sub))
            else:
                ok, st = True, False
            if ok:
                if sub:
                    placed.append((lab, sub))
                res = rec(t + 1, rest & ~sub, any_strict or st)
                if res is not None:
                    return res
                if sub:
                    placed.pop()
            if sub == eligible:
                break
            sub = (sub - eligible) & eligible
        return None

    return rec(0, kmask, False)


def _joint_witness(g, C, us, found) -> DeviationWitness:
    hosts = {lab for lab, _ in found if lab is not None}
    movers = 0
    for _, grp in found:
        movers |= grp
    masks = C.label_masks()
    vacated = sorted(lab for lab, m in masks.items() if m & ~movers == 0 and lab not in hosts)
    spare = iter(C.free_labels() + vacated)
    target: dict[int, int] = {}
    for lab, grp in found:
        if lab is None:
            lab = next(spare)
        for a in members_of(grp):
            target[a] = lab
    agents = tuple(sorted(target))
    after_C = CoalitionStructure([target.get(i, C.labels[i]) for i in range(C.n)])
    after = utilities(g, after_C)
    return DeviationWitness(
        "joint",
        agents,
        tuple(target[a] for a in agents),
        tuple(us[a] for a in agents),
        tuple(after[a] for a in agents),
    )


def is_k_strong_by_partitions(g: WeightedGraph, C: CoalitionStructure, k: int, mode: str = STRICT) -> bool:
    """Independent check of k-strong stability by enumerating every target partition.

    A target partition is reachable by deviators if each of its blocks can be
    hosted by at most one original coalition (distinct blocks, distinct hosts);
    members outside their block's host are the deviators.
    """
    _check_partition(g, C)
    _check_k(g, k)
    _check_mode(mode)
    strict = mode == STRICT
    us = utilities(g, C)
    original = C.label_masks()
    current = set(original.values())
    for rgs in restricted_growth_strings(g.n):
        blocks = rgs_blocks(rgs)
        if set(blocks) == current:
            continue
        options = []
        for b in blocks:
            util = coalition_utilities(g, b)
            better = mask_of(a for a in members_of(b) if util[a] > us[a])
            ok = better if strict else mask_of(a for a in members_of(b) if util[a] >= us[a])
            opts = [(None, b, better)] if b & ~ok == 0 else []
            for lab, xm in original.items():
                if b & xm and b & ~xm & ~ok == 0:
                    opts.append((lab, b & ~xm, better))
            if not opts:
                break
            options.append(opts)
        else:
            for choice in product(*options):
                hosts = [c[0] for c in choice if c[0] is not None]
                if len(hosts) != len(set(hosts)):
                    continue
                movers = 0
                strict_mover = False
                for _, mv, better in choice:
                    movers |= mv
                    strict_mover = strict_mover or bool(mv & better)
                if movers and bin(movers).count("1") <= k and (strict or strict_mover):
                    return False
    return True


# -- blocking coalitions -------------------------------------------------


def find_blocking_coalition(
    g: WeightedGraph,
    C: CoalitionStructure,
    mode: str = "strong",
    guard_limit: int = DEFAULT_GUARD,
) -> DeviationWitness | None:
    """First coalition T (by size, then lexicographic) whose members prefer T.

    strong: every member strictly better; weak: all weakly, one strictly.
    """
    _check_partition(g, C)
    if mode not in ("strong", "weak"):
        raise ValueError(f"mode must be 'strong' or 'weak', got {mode!r}")
    if 2 ** g.n > guard_limit:
        raise GuardExceeded(f"2^{g.n} candidate coalitions exceed guard {guard_limit}")
    us = utilities(g, C)
    weak = mode == "weak"
    for size in range(1, g.n + 1):
        for T in combinations(range(g.n), size):
            util = coalition_utilities(g, mask_of(T))
            if weak:
                if all(util[i] >= us[i] for i in T) and any(util[i] > us[i] for i in T):
                    break
            elif all(util[i] > us[i] for i in T):
                break
        else:
            continue
        return DeviationWitness(
            "blocking", T, T, tuple(us[i] for i in T), tuple(util[i] for i in T)
        )
    return None


def is_core(g: WeightedGraph, C: CoalitionStructure, guard_limit: int = DEFAULT_GUARD) -> StabilityResult:
    w = find_blocking_coalition(g, C, "strong", guard_limit)
    return StabilityResult(w is None, w)


def is_strict_core(g: WeightedGraph, C: CoalitionStructure, guard_limit: int = DEFAULT_GUARD) -> StabilityResult:
    w = find_blocking_coalition(g, C, "weak", guard_limit)
    return StabilityResult(w is None, w)


def check(g: WeightedGraph, C: CoalitionStructure, kind: str, k: int | None = None,
          mode: str = STRICT, guard_limit: int = DEFAULT_GUARD) -> StabilityResult:
    """Dispatch on a stability kind name: nash, kstrong, core, strict-core."""
    if kind == "nash":
        return is_nash(g, C)
    if kind == "kstrong":
        return is_k_strong(g, C, g.n if k is None else k, mode, guard_limit)
    if kind == "core":
        return is_core(g, C, guard_limit)
    if kind == "strict-core":
        return is_strict_core(g, C, guard_limit)
    raise ValueError(f"unknown stability kind {kind!r}")
