"""Shared instances, random generators and naive reference oracles.

The oracles here deliberately avoid the package's own enumeration code:
partitions are generated by element insertion, utilities by explicit
double loops over edge dictionaries.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product

from hypothesis import strategies as st

from mfhg.experiments import InstanceSpec, generate
from mfhg.game import CoalitionStructure
from mfhg.graph import WeightedGraph

F = Fraction


# -- instances -------------------------------------------------------------


def path(n):
    return WeightedGraph(n, [(i, i + 1, 1) for i in range(n - 1)])


def triangle():
    return WeightedGraph(3, [(0, 1, 1), (0, 2, 1), (1, 2, 1)])


def star(leaves):
    return WeightedGraph(leaves + 1, [(0, j, 1) for j in range(1, leaves + 1)])


def star_instance(n=7, eps=F(1, 100)):
    return generate(InstanceSpec("star_eps", {"n": n, "eps": eps}))


def negative_instance(M=1000):
    return generate(InstanceSpec("negative_no_nash", {"M": M}))


def layered_instance(k=3):
    return generate(InstanceSpec("layered_clique", {"k": k}))


def cycle_instance():
    return generate(InstanceSpec("infinite_dynamics", {}))


def cpos_instance(eps=F(1, 10)):
    return generate(InstanceSpec("cpos_path", {"eps": eps}))


def cs(n, *blocks):
    return CoalitionStructure.from_coalitions(n, blocks)


# -- random generation -----------------------------------------------------


def random_graph(rng, n, p=0.5, weights=(1,)):
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.append((i, j, F(rng.choice(weights))))
    return WeightedGraph(n, edges)


def random_partition(rng, n):
    return CoalitionStructure([rng.randrange(n) for _ in range(n)]) if n else CoalitionStructure(())


WEIGHTS_SIGNED = [F(k, 2) for k in range(-10, 11)]
WEIGHTS_NONNEG = [F(k, 2) for k in range(0, 11)]


@st.composite
def graphs(draw, min_n=1, max_n=7, weights=None, unweighted=False):
    n = draw(st.integers(min_n, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = []
    for (i, j), k in zip(pairs, keep):
        if not k:
            continue
        if unweighted:
            w = F(1)
        else:
            pool = weights or WEIGHTS_SIGNED
            w = draw(st.sampled_from(pool))
        edges.append((i, j, w))
    return WeightedGraph(n, edges)


@st.composite
def graph_and_partition(draw, **kw):
    g = draw(graphs(**kw))
    labels = draw(st.lists(st.integers(0, max(g.n - 1, 0)), min_size=g.n, max_size=g.n))
    return g, CoalitionStructure(labels)


# -- naive oracles ---------------------------------------------------------


def edge_dict(g):
    d = {}
    for u, v, w in g.edges():
        d[(u, v)] = w
        d[(v, u)] = w
    return d


def naive_utility(g, block, i):
    block = set(block)
    if len(block) <= 1:
        return F(0)
    d = edge_dict(g)
    return sum((d.get((i, j), F(0)) for j in block if j != i), F(0)) / (len(block) - 1)


def naive_welfare(g, blocks):
    return sum((naive_utility(g, b, i) for b in blocks for i in b), F(0))


def all_partitions(items):
    """Set partitions by inserting each element into an existing block or a new one."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for p in all_partitions(rest):
        for k in range(len(p)):
            yield p[:k] + [[first] + p[k]] + p[k + 1:]
        yield [[first]] + p


def block_of(blocks, i):
    for b in blocks:
        if i in b:
            return b
    raise KeyError(i)


def naive_nash(g, blocks):
    for i in range(g.n):
        own = block_of(blocks, i)
        cur = naive_utility(g, own, i)
        others = [b for b in blocks if b is not own]
        if len(own) > 1:
            others = others + [[]]
        for b in others:
            if naive_utility(g, list(b) + [i], i) > cur:
                return False
    return True


def naive_kstrong(g, blocks, k, relaxed=False):
    """Label every deviator with an existing block or one of |K| fresh groups."""
    n = g.n
    cur = {i: naive_utility(g, block_of(blocks, i), i) for i in range(n)}
    m = len(blocks)
    for size in range(1, k + 1):
        for K in combinations(range(n), size):
            for targets in product(range(m + size), repeat=size):
                new = [[x for x in b if x not in K] for b in blocks] + [[] for _ in range(size)]
                for a, t in zip(K, targets):
                    new[t].append(a)
                gains = [naive_utility(g, block_of(new, a), a) - cur[a] for a in K]
                if relaxed:
                    if all(x >= 0 for x in gains) and any(x > 0 for x in gains):
                        return False
                elif all(x > 0 for x in gains):
                    return False
    return True


def naive_core(g, blocks, weak=False):
    n = g.n
    cur = {i: naive_utility(g, block_of(blocks, i), i) for i in range(n)}
    for size in range(1, n + 1):
        for T in combinations(range(n), size):
            gains = [naive_utility(g, T, a) - cur[a] for a in T]
            if weak:
                if all(x >= 0 for x in gains) and any(x > 0 for x in gains):
                    return False
            elif all(x > 0 for x in gains):
                return False
    return True


def naive_optimum(g):
    return max(naive_welfare(g, p) for p in all_partitions(range(g.n)))


def to_structure(n, blocks):
    return CoalitionStructure.from_coalitions(n, blocks)
