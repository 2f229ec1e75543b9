"""Improving and best-response dynamics with exact cycle detection."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .game import CoalitionStructure, _check_partition, apply_move, utilities
from .graph import WeightedGraph, format_rational
from .stability import best_response, improving_moves

CONVERGED = "converged"
CYCLE = "cycle_detected"
STEP_CAP = "step_cap_reached"

SCHEDULERS = ("first-improve", "best-response", "scripted", "random")


class ScriptError(ValueError):
    """A scripted move is not an improving move at the time it is played."""

    def __init__(self, step: int, message: str):
        self.step = step
        super().__init__(f"step {step}: {message}")


@dataclass(frozen=True)
class Step:
    agent: int
    source: int
    target: int
    before: Fraction
    after: Fraction

    def to_json(self) -> dict:
        return {
            "agent": self.agent,
            "from": self.source,
            "to": self.target,
            "before": format_rational(self.before),
            "after": format_rational(self.after),
        }


@dataclass
class DynamicsTrace:
    initial: CoalitionStructure
    steps: list[Step] = field(default_factory=list)
    terminal: str = STEP_CAP
    final: CoalitionStructure | None = None
    first_repeat: int | None = None
    cycle_length: int | None = None

    def terminal_json(self) -> dict:
        out = {"terminal": self.terminal, "steps": len(self.steps), "final": self.final.to_json()}
        if self.terminal == CYCLE:
            out["first_repeat"] = self.first_repeat
            out["cycle_length"] = self.cycle_length
        return out

    def to_jsonl(self) -> str:
        lines = [json.dumps({"step": t, **s.to_json()}) for t, s in enumerate(self.steps)]
        lines.append(json.dumps(self.terminal_json()))
        return "\n".join(lines) + "\n"


def _next_move(g, C, scheduler, rng):
    if scheduler == "first-improve":
        for i in range(g.n):
            moves = improving_moves(g, C, i)
            if moves:
                return i, moves[0][0]
        return None
    if scheduler == "best-response":
        for i in range(g.n):
            j = best_response(g, C, i)
            if j != C.labels[i]:
                return i, j
        return None
    if scheduler == "random":
        options = [(i, j) for i in range(g.n) for j, _ in improving_moves(g, C, i)]
        return rng.choice(options) if options else None
    raise ValueError(f"unknown scheduler {scheduler!r}")


def run_dynamics(
    g: WeightedGraph,
    C0: CoalitionStructure,
    scheduler: str = "first-improve",
    max_steps: int = 10_000,
    script: Sequence[tuple[int, int | None]] | None = None,
    seed: int | None = None,
) -> DynamicsTrace:
    """Play improving moves until a Nash outcome, a repeated outcome, or the step cap.

    Structures are kept in canonical labelling, so targets in ``script`` are
    canonical coalition indices (an index past the last coalition means a
    fresh coalition). A ``None`` target plays the agent's best response.
    An exhausted script ends the run like a step cap unless the outcome is
    already Nash stable.
    """
    _check_partition(g, C0)
    if scheduler not in SCHEDULERS:
        raise ValueError(f"unknown scheduler {scheduler!r}")
    if scheduler == "scripted" and script is None:
        raise ValueError("scripted scheduler needs a script")
    rng = random.Random(seed)
    C = C0.normalized()
    trace = DynamicsTrace(initial=C)
    seen = {C: 0}
    while True:
        t = len(trace.steps)
        if scheduler == "scripted":
            if t >= len(script):
                trace.terminal = CONVERGED if _no_moves(g, C) else STEP_CAP
                break
            if t >= max_steps:
                trace.terminal = STEP_CAP
                break
            i, j = script[t]
            if j is None:
                j = best_response(g, C, i)
            gains = dict(improving_moves(g, C, i))
            if j not in gains:
                raise ScriptError(t, f"moving agent {i} to coalition {j} is not improving")
            move = (i, j)
        else:
            move = _next_move(g, C, scheduler, rng)
            if move is None:
                trace.terminal = CONVERGED
                break
            if t >= max_steps:
                trace.terminal = STEP_CAP
                break
        i, j = move
        before = utilities(g, C)[i]
        nxt = apply_move(C, i, j)
        after = utilities(g, nxt)[i]
        trace.steps.append(Step(i, C.labels[i], j, before, after))
        C = nxt.normalized()
        if C in seen:
            trace.terminal = CYCLE
            trace.first_repeat = seen[C]
            trace.cycle_length = len(trace.steps) - seen[C]
            break
        seen[C] = len(trace.steps)
    trace.final = C
    return trace


def _no_moves(g, C) -> bool:
    return not any(improving_moves(g, C, i) for i in range(g.n))


def residual_congestion_dynamics(
    anchors: Sequence[int],
    leftovers: Sequence[int],
    allowed: Mapping[int, Sequence[int]],
    start: Mapping[int, int] | None = None,
) -> dict[int, int]:
    """Singleton congestion game: each leftover picks one allowed anchor and
    wants as few co-users as possible. Returns an assignment with no improving switch.

    The default start puts every leftover on its lowest-indexed allowed anchor.
    Each switch strictly lowers the sorted load vector, so the loop terminates.
    """
    anchor_set = set(anchors)
    for x in leftovers:
        opts = allowed.get(x, ())
        if not opts:
            raise ValueError(f"leftover {x} has no allowed anchor")
        if not set(opts) <= anchor_set:
            raise ValueError(f"leftover {x} allowed on non-anchors {sorted(set(opts) - anchor_set)}")
    assign = {x: (start[x] if start is not None else min(allowed[x])) for x in leftovers}
    load = {a: 0 for a in anchors}
    for a in assign.values():
        load[a] += 1
    moved = True
    while moved:
        moved = False
        for x in sorted(leftovers):
            cur = assign[x]
            best = min(sorted(allowed[x]), key=lambda a: load[a])
            if load[best] + 1 < load[cur]:
                load[cur] -= 1
                load[best] += 1
                assign[x] = best
                moved = True
    return assign
