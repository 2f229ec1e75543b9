"""Weighted undirected graphs with exact rational weights, plus the text format."""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

_NUMBER = re.compile(r"^-?\d+(?:/\d+)?$")


class GraphFormatError(ValueError):
    """Raised for malformed graph files; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def parse_rational(token: str) -> Fraction:
    """Parse ``"7"``, ``"-3"`` or ``"p/q"`` into a Fraction (q > 0)."""
    token = token.strip()
    if not _NUMBER.match(token):
        raise ValueError(f"not an integer or p/q rational: {token!r}")
    if "/" in token:
        num, den = token.split("/")
        if int(den) == 0:
            raise ValueError(f"zero denominator: {token!r}")
        return Fraction(int(num), int(den))
    return Fraction(int(token))


def format_rational(x: Fraction | int) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


class WeightedGraph:
    """Undirected graph on agents ``0..n-1`` with one Fraction weight per edge.

    Instances are treated as immutable once built.
    """

    __slots__ = ("n", "_w", "_adj", "_masks", "_cache")

    def __init__(self, n: int, edges: Iterable[tuple[int, int, Fraction | int | str]] = ()):
        if n < 0:
            raise ValueError("agent count must be non-negative")
        self.n = n
        self._w: dict[tuple[int, int], Fraction] = {}
        adj: list[dict[int, Fraction]] = [dict() for _ in range(n)]
        for u, v, w in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            key = (min(u, v), max(u, v))
            if key in self._w:
                raise ValueError(f"duplicate edge {key}")
            w = parse_rational(w) if isinstance(w, str) else Fraction(w)
            self._w[key] = w
            adj[u][v] = w
            adj[v][u] = w
        self._adj = tuple(adj)
        self._masks = tuple(sum(1 << j for j in a) for a in adj)
        self._cache: dict = {}

    # -- basic access -------------------------------------------------

    def weight(self, i: int, j: int) -> Fraction:
        """Weight of edge {i, j}; 0 when the pair is not an edge."""
        return self._adj[i].get(j, Fraction(0))

    def has_edge(self, i: int, j: int) -> bool:
        return j in self._adj[i]

    def neighbors(self, i: int) -> Mapping[int, Fraction]:
        return self._adj[i]

    def neighbor_mask(self, i: int) -> int:
        return self._masks[i]

    def edges(self) -> Iterator[tuple[int, int, Fraction]]:
        """Edges as ``(u, v, w)`` with ``u < v``, sorted by ``(u, v)``."""
        for (u, v) in sorted(self._w):
            yield u, v, self._w[(u, v)]

    @property
    def m(self) -> int:
        return len(self._w)

    @property
    def is_unweighted(self) -> bool:
        return all(w == 1 for w in self._w.values())

    @property
    def is_nonnegative(self) -> bool:
        return all(w >= 0 for w in self._w.values())

    def _check(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise IndexError(f"agent {i} out of range [0, {self.n})")

    def __eq__(self, other):
        return isinstance(other, WeightedGraph) and self.n == other.n and self._w == other._w

    def __hash__(self):
        return hash((self.n, frozenset(self._w.items())))

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, m={self.m})"


def degree_weight(g: WeightedGraph, i: int) -> Fraction:
    g._check(i)
    return sum(g.neighbors(i).values(), Fraction(0))


def max_incident_weight(g: WeightedGraph, i: int) -> Fraction | None:
    g._check(i)
    ws = g.neighbors(i).values()
    return max(ws) if ws else None


def induced_edge_weight(g: WeightedGraph, S: Iterable[int]) -> Fraction:
    """Total weight of the edges with both endpoints in ``S``."""
    members = set(S)
    for i in members:
        g._check(i)
    total = Fraction(0)
    for i in members:
        for j, w in g.neighbors(i).items():
            if i < j and j in members:
                total += w
    return total


def induced_degrees(g: WeightedGraph, S: Iterable[int]) -> dict[int, int]:
    """Edge-count degree of every node of ``S`` inside the subgraph induced by ``S``."""
    members = set(S)
    return {i: sum(1 for j in g.neighbors(i) if j in members) for i in members}


# -- text format ---------------------------------------------------------


def parse_graph(text: str | bytes) -> WeightedGraph:
    """Parse the ``n m`` / ``u v w`` edge-list format.

    ``#`` starts a comment; blank lines are ignored. Errors name the line.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    header = None
    edges: list[tuple[int, int, Fraction]] = []
    seen: dict[tuple[int, int], int] = {}
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if header is None:
            if len(parts) != 2 or not all(p.isdigit() for p in parts):
                raise GraphFormatError("header must be 'n m' with non-negative integers", lineno)
            header = (int(parts[0]), int(parts[1]))
            continue
        n = header[0]
        if len(parts) != 3:
            raise GraphFormatError("edge line must be 'u v w'", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError("node ids must be integers", lineno) from None
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"node id out of range [0, {n})", lineno)
        if u == v:
            raise GraphFormatError("self-loop", lineno)
        try:
            w = parse_rational(parts[2])
        except ValueError as exc:
            raise GraphFormatError(str(exc), lineno) from None
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(f"duplicate edge {key} (first on line {seen[key]})", lineno)
        seen[key] = lineno
        edges.append((u, v, w))
    if header is None:
        raise GraphFormatError("missing 'n m' header")
    if len(edges) != header[1]:
        raise GraphFormatError(f"header declares {header[1]} edges, found {len(edges)}")
    return WeightedGraph(header[0], edges)


def format_graph(g: WeightedGraph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines += [f"{u} {v} {format_rational(w)}" for u, v, w in g.edges()]
    return "\n".join(lines) + "\n"


def read_graph(path) -> WeightedGraph:
    with open(path, "rb") as fh:
        return parse_graph(fh.read())


def write_graph(g: WeightedGraph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_graph(g))
