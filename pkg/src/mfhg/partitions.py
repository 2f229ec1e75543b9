"""Set-partition enumeration (restricted growth strings) and subset helpers."""

from __future__ import annotations

from itertools import combinations
from typing import Callable, Iterator, Sequence


def bell(n: int) -> int:
    """Number of set partitions of an n-set (Bell triangle)."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def restricted_growth_strings(n: int) -> Iterator[tuple[int, ...]]:
    """Yield every restricted growth string of length ``n`` in lexicographic order.

    ``a[0] == 0`` and ``a[i] <= 1 + max(a[:i])``; each string is the canonical
    labelling of exactly one set partition.
    """
    if n == 0:
        yield ()
        return
    a = [0] * n

    def rec(i: int, top: int):
        if i == n:
            yield tuple(a)
            return
        for v in range(top + 2):
            a[i] = v
            yield from rec(i + 1, max(top, v))

    yield from rec(1, 0)


def rgs_blocks(rgs: Sequence[int]) -> list[int]:
    """Block bitmasks of a restricted growth string, in label order."""
    masks: list[int] = []
    for i, lab in enumerate(rgs):
        if lab == len(masks):
            masks.append(0)
        masks[lab] |= 1 << i
    return masks


def block_partitions(
    universe: int,
    accept: Callable[[list[int], int], bool] | None = None,
) -> Iterator[list[int]]:
    """Enumerate partitions of the bitmask ``universe`` block by block.

    Each step fixes the block containing the lowest unplaced element.
    ``accept(blocks, new_block)`` may veto a partial partition; it is only
    called once ``new_block`` is final, so it can safely prune subtrees.
    """
    blocks: list[int] = []

    def rec(rest: int):
        if not rest:
            yield list(blocks)
            return
        low = rest & -rest
        others = rest ^ low
        # all subsets of `others`, smallest first
        sub = 0
        while True:
            block = low | sub
            if accept is None or accept(blocks, block):
                blocks.append(block)
                yield from rec(rest ^ block)
                blocks.pop()
            if sub == others:
                break
            sub = (sub - others) & others

    yield from rec(universe)


def subsets_by_size(items: Sequence[int], max_size: int | None = None, min_size: int = 1):
    """Subsets of ``items`` ordered by size, then lexicographically."""
    top = len(items) if max_size is None else min(max_size, len(items))
    for s in range(min_size, top + 1):
        yield from combinations(items, s)
