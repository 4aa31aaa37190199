"""Small named graphs used by the test suite, the scripts and the CLI."""

from __future__ import annotations

import itertools

import numpy as np

from .graphs import BipartiteGraph, RegularGraph
from .spectral import circulant, complete_graph, gabber_galil


def petersen() -> RegularGraph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return RegularGraph.from_edges(10, outer + spokes + inner)


def complete_bipartite_graph(a: int, b: int) -> RegularGraph:
    """K_{a,b} as an ordinary graph (regular only when a == b)."""
    edges = [(i, a + j) for i in range(a) for j in range(b)]
    return RegularGraph.from_edges(a + b, edges, regular=(a == b))


def chain() -> BipartiteGraph:
    """Three bits, two checks: r0 ~ {l0, l1}, r1 ~ {l1, l2}."""
    return BipartiteGraph.from_pairs(3, 2, [(0, 0), (1, 0), (1, 1), (2, 1)])


def toy_b0() -> BipartiteGraph:
    return BipartiteGraph.from_pairs(2, 3, [(0, 0), (0, 1), (1, 1), (1, 2)])


def matching(n: int) -> BipartiteGraph:
    return BipartiteGraph.from_pairs(n, n, [(i, i) for i in range(n)])


def k21() -> BipartiteGraph:
    return BipartiteGraph.from_pairs(2, 1, [(0, 0), (1, 0)])


def complete_bipartite(a: int, b: int) -> BipartiteGraph:
    return BipartiteGraph.from_pairs(a, b, list(itertools.product(range(a), range(b))))


def parity_inner(n: int) -> BipartiteGraph:
    """One right vertex joined to all of [n]: the SS1 graph of the parity code."""
    return BipartiteGraph.from_pairs(n, 1, [(i, 0) for i in range(n)])


def toy_outer() -> BipartiteGraph:
    return BipartiteGraph.from_pairs(2, 1, [(0, 0), (1, 0)])


def toy_inner() -> BipartiteGraph:
    return BipartiteGraph.from_pairs(2, 2, [(0, 0), (1, 1)])


REGULAR = {
    "K4": lambda: complete_graph(4),
    "K5": lambda: complete_graph(5),
    "C6": lambda: circulant(6, [1, 5]),
    "K33": lambda: complete_bipartite_graph(3, 3),
    "petersen": petersen,
    "circ8": lambda: circulant(8, [1, 4, 7]),
    "gg2": lambda: gabber_galil(2),
    "gg3": lambda: gabber_galil(3),
}

BIPARTITE = {
    "Bc": chain,
    "B0": toy_b0,
    "K21": k21,
    "match3": lambda: matching(3),
    "toy_outer": toy_outer,
    "toy_inner": toy_inner,
}


def by_name(name: str):
    if name in REGULAR:
        return REGULAR[name]()
    if name in BIPARTITE:
        return BIPARTITE[name]()
    raise KeyError(f"unknown fixture {name!r}; known: {sorted(REGULAR) + sorted(BIPARTITE)}")


def random_biregular_pair(rng: np.random.Generator, max_left: int = 60):
    """A random valid (outer, inner) routed-product input with a shuffled right order.

    The outer graph is a random (d1, d2)-biregular multigraph from a
    configuration-model matching of edge stubs.
    """
    while True:
        d1 = int(rng.integers(1, 4))
        d2 = int(rng.integers(2, 6))
        n_right = int(rng.integers(1, 8))
        total = d2 * n_right
        if total % d1 or total // d1 > max_left:
            continue
        n_left = total // d1
        break
    stubs = np.repeat(np.arange(n_right), d2)
    rng.shuffle(stubs)
    pairs = [(i // d1, int(stubs[i])) for i in range(total)]
    outer = BipartiteGraph.from_pairs(n_left, n_right, pairs)
    order = [list(row) for row in outer.right_order]
    for row in order:
        rng.shuffle(row)
    outer = outer.with_right_order(order)
    d_in = int(rng.integers(1, 4))
    n_in = int(rng.integers(d_in, d_in + 5))
    inner_pairs = []
    for i in range(d2):
        for w in rng.choice(n_in, size=d_in, replace=False):
            inner_pairs.append((i, int(w)))
    inner = BipartiteGraph.from_pairs(d2, n_in, inner_pairs)
    return outer, inner
