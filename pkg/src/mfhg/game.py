"""Coalition structures, MFHG utilities and welfare, moves, and basic-coalition decomposition."""

from __future__ import annotations

import enum
import json
from fractions import Fraction
from typing import Iterable, Sequence

from .graph import WeightedGraph, induced_degrees

ZERO = Fraction(0)


class PartitionError(ValueError):
    pass


def mask_of(members: Iterable[int]) -> int:
    m = 0
    for i in members:
        m |= 1 << i
    return m


def members_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


class CoalitionStructure:
    """Assignment of every agent to one of ``n`` candidate coalition labels.

    Labels are plumbing: equality and hashing use the canonical form
    (non-empty coalitions ordered by smallest member, members ascending).
    """

    __slots__ = ("labels", "_blocks")

    def __init__(self, labels: Sequence[int]):
        labels = tuple(int(x) for x in labels)
        n = len(labels)
        for i, j in enumerate(labels):
            if not 0 <= j < max(n, 1):
                raise PartitionError(f"agent {i} has label {j} outside [0, {n})")
        self.labels = labels
        self._blocks = None

    @classmethod
    def from_coalitions(cls, n: int, coalitions: Iterable[Iterable[int]]) -> "CoalitionStructure":
        labels = [-1] * n
        idx = 0
        for coal in coalitions:
            coal = list(coal)
            if not coal:
                continue
            for i in coal:
                if not 0 <= i < n:
                    raise PartitionError(f"agent {i} out of range [0, {n})")
                if labels[i] != -1:
                    raise PartitionError(f"agent {i} appears in more than one coalition")
                labels[i] = idx
            idx += 1
        missing = [i for i, x in enumerate(labels) if x == -1]
        if missing:
            raise PartitionError(f"agents {missing} are not assigned to any coalition")
        return cls(labels)

    @classmethod
    def singletons(cls, n: int) -> "CoalitionStructure":
        return cls(range(n))

    @classmethod
    def grand(cls, n: int) -> "CoalitionStructure":
        return cls([0] * n)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def blocks(self) -> tuple[tuple[int, ...], ...]:
        """Canonical form: non-empty coalitions sorted by smallest member."""
        if self._blocks is None:
            groups: dict[int, list[int]] = {}
            for i, j in enumerate(self.labels):
                groups.setdefault(j, []).append(i)
            self._blocks = tuple(sorted(tuple(g) for g in groups.values()))
        return self._blocks

    def members(self, label: int) -> tuple[int, ...]:
        return tuple(i for i, j in enumerate(self.labels) if j == label)

    def coalition(self, i: int) -> tuple[int, ...]:
        return self.members(self.labels[i])

    def coalition_mask(self, i: int) -> int:
        j = self.labels[i]
        return mask_of(a for a, b in enumerate(self.labels) if b == j)

    def label_masks(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for i, j in enumerate(self.labels):
            out[j] = out.get(j, 0) | (1 << i)
        return out

    def canonical_labels(self) -> list[int]:
        """Existing labels in canonical coalition order."""
        first: dict[int, int] = {}
        for i, j in enumerate(self.labels):
            first.setdefault(j, i)
        return sorted(first, key=first.__getitem__)

    def free_labels(self) -> list[int]:
        used = set(self.labels)
        return [j for j in range(self.n) if j not in used]

    def normalized(self) -> "CoalitionStructure":
        """Same partition, relabelled so that labels are canonical indices."""
        order = {lab: k for k, lab in enumerate(self.canonical_labels())}
        return CoalitionStructure([order[j] for j in self.labels])

    def __eq__(self, other):
        return isinstance(other, CoalitionStructure) and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def __repr__(self):
        inner = ", ".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks)
        return f"CoalitionStructure({inner})"

    def to_json(self) -> dict:
        return {"n": self.n, "coalitions": [list(b) for b in self.blocks]}

    @classmethod
    def from_json(cls, data: dict) -> "CoalitionStructure":
        try:
            n = data["n"]
            coalitions = data["coalitions"]
        except (KeyError, TypeError):
            raise PartitionError("partition JSON needs 'n' and 'coalitions'") from None
        if not isinstance(n, int) or n < 0:
            raise PartitionError("'n' must be a non-negative integer")
        for coal in coalitions:
            if not isinstance(coal, list) or not all(isinstance(i, int) for i in coal):
                raise PartitionError("each coalition must be a list of agent ids")
        return cls.from_coalitions(n, coalitions)


def format_partition(C: CoalitionStructure) -> str:
    return json.dumps(C.to_json()) + "\n"


def parse_partition(text: str | bytes) -> CoalitionStructure:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PartitionError(f"invalid JSON: {exc}") from None
    return CoalitionStructure.from_json(data)


def read_partition(path) -> CoalitionStructure:
    with open(path, "rb") as fh:
        return parse_partition(fh.read())


def write_partition(C: CoalitionStructure, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_partition(C))


def _check_partition(g: WeightedGraph, C: CoalitionStructure) -> None:
    if C.n != g.n:
        raise PartitionError(f"partition has {C.n} agents, graph has {g.n}")


# -- utilities -----------------------------------------------------------


def coalition_utilities(g: WeightedGraph, mask: int) -> dict[int, Fraction]:
    """Utility of every member of the coalition ``mask`` (cached on the graph)."""
    cache = g._cache.setdefault("util", {})
    hit = cache.get(mask)
    if hit is not None:
        return hit
    members = members_of(mask)
    size = len(members)
    if size <= 1:
        out = {i: ZERO for i in members}
    else:
        out = {}
        for i in members:
            s = ZERO
            for j, w in g.neighbors(i).items():
                if mask >> j & 1:
                    s += w
            out[i] = s / (size - 1)
    cache[mask] = out
    return out


def utility_in(g: WeightedGraph, mask: int, i: int) -> Fraction:
    return coalition_utilities(g, mask)[i]


def coalition_welfare(g: WeightedGraph, mask: int) -> Fraction:
    cache = g._cache.setdefault("sw", {})
    hit = cache.get(mask)
    if hit is None:
        hit = sum(coalition_utilities(g, mask).values(), ZERO)
        cache[mask] = hit
    return hit


def utility(g: WeightedGraph, C: CoalitionStructure, i: int) -> Fraction:
    _check_partition(g, C)
    if not 0 <= i < g.n:
        raise IndexError(f"agent {i} out of range")
    return utility_in(g, C.coalition_mask(i), i)


def utilities(g: WeightedGraph, C: CoalitionStructure) -> list[Fraction]:
    _check_partition(g, C)
    out = [ZERO] * g.n
    for mask in C.label_masks().values():
        for i, u in coalition_utilities(g, mask).items():
            out[i] = u
    return out


def social_welfare(g: WeightedGraph, C: CoalitionStructure) -> Fraction:
    _check_partition(g, C)
    return sum((coalition_welfare(g, m) for m in C.label_masks().values()), ZERO)


# -- moves ---------------------------------------------------------------


def apply_move(C: CoalitionStructure, i: int, j: int) -> CoalitionStructure:
    """Move agent ``i`` to candidate coalition ``j`` (identity if already there)."""
    if not 0 <= j < C.n:
        raise IndexError(f"coalition index {j} out of range [0, {C.n})")
    if not 0 <= i < C.n:
        raise IndexError(f"agent {i} out of range")
    labels = list(C.labels)
    labels[i] = j
    return CoalitionStructure(labels)


def apply_joint_deviation(C: CoalitionStructure, moves: Sequence[tuple[int, int]]) -> CoalitionStructure:
    """Simultaneously move every listed agent to its target index."""
    labels = list(C.labels)
    seen = set()
    for i, j in moves:
        if i in seen:
            raise ValueError(f"agent {i} listed twice in a joint deviation")
        seen.add(i)
        if not 0 <= i < C.n:
            raise IndexError(f"agent {i} out of range")
        if not 0 <= j < C.n:
            raise IndexError(f"coalition index {j} out of range [0, {C.n})")
        labels[i] = j
    return CoalitionStructure(labels)


# -- basic coalitions ----------------------------------------------------


class BasicKind(enum.Enum):
    K1 = "K1"
    K2 = "K2"
    K3 = "K3"


def classify_basic(g: WeightedGraph, S: Iterable[int]) -> BasicKind | None:
    S = sorted(set(S))
    if len(S) == 1:
        return BasicKind.K1
    if len(S) == 2:
        return BasicKind.K2 if g.has_edge(*S) else None
    if len(S) == 3:
        a, b, c = S
        if g.has_edge(a, b) and g.has_edge(a, c) and g.has_edge(b, c):
            return BasicKind.K3
    return None


def min_degree_sum_edge(g: WeightedGraph, S: Iterable[int]) -> tuple[int, int]:
    """Internal edge of ``S`` minimising the sum of endpoint degrees in G[S]."""
    if not g.is_unweighted:
        raise ValueError("min_degree_sum_edge is defined for unweighted graphs")
    deg = induced_degrees(g, S)
    best = None
    for i in sorted(deg):
        for j in sorted(g.neighbors(i)):
            if j > i and j in deg:
                key = (deg[i] + deg[j], i, j)
                if best is None or key < best:
                    best = key
    if best is None:
        raise ValueError("coalition has no internal edge")
    return best[1], best[2]


def _split_basic(g: WeightedGraph, S: list[int]) -> list[list[int]]:
    if len(S) <= 2:
        if len(S) == 2 and not g.has_edge(*S):
            return [[S[0]], [S[1]]]
        return [S]
    if len(S) == 3:
        a, b, c = S
        present = [(x, y) for x, y in ((a, b), (a, c), (b, c)) if g.has_edge(x, y)]
        if len(present) == 3:
            return [S]
        if not present:
            return [[a], [b], [c]]
        # one or two edges: keep one edge as K2, the remaining node alone
        x, y = present[0]
        (z,) = [v for v in S if v not in (x, y)]
        return [[x, y], [z]]
    deg = induced_degrees(g, S)
    if not any(deg.values()):
        return [[v] for v in S]
    i, j = min_degree_sum_edge(g, S)
    rest = [v for v in S if v not in (i, j)]
    return [[i, j]] + _split_basic(g, rest)


def decompose_to_basic(g: WeightedGraph, C: CoalitionStructure) -> CoalitionStructure:
    """Split every coalition into K1/K2/K3 pieces without lowering welfare (unweighted only)."""
    if not g.is_unweighted:
        raise ValueError("decompose_to_basic requires an unweighted graph")
    _check_partition(g, C)
    out: list[list[int]] = []
    for block in C.blocks:
        out.extend(_split_basic(g, list(block)))
    return CoalitionStructure.from_coalitions(g.n, out)
