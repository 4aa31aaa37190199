"""Regular multigraphs, bipartite multigraphs and their neighborhood queries.

Adjacency conventions:

* ``RegularGraph.adj[v, v] = t`` means ``t`` loop units at ``v``, each adding
  1 to the row sum, so ``power(G, k)`` is exactly ``d**k``-regular.
* ``BipartiteGraph`` keeps edges as sorted ``(left, right, multiplicity)``
  triples. ``right_order[v]`` lists the left endpoints of the edge slots at
  right vertex ``v``; parallel edges repeat their endpoint.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class GraphError(ValueError):
    pass


class LoopError(GraphError):
    def __init__(self, loops: dict[int, int]):
        self.loops = loops
        shown = ", ".join(f"{v}:{t}" for v, t in sorted(loops.items())[:8])
        super().__init__(
            f"graph has loops at {len(loops)} vertices ({shown}); strip them first"
        )


@dataclass(frozen=True, eq=False)
class RegularGraph:
    adj: np.ndarray
    d: int | None = None

    def __post_init__(self):
        adj = np.array(self.adj, dtype=np.int64, copy=True)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise GraphError("adjacency must be square")
        if (adj < 0).any():
            raise GraphError("adjacency entries must be nonnegative")
        if not np.array_equal(adj, adj.T):
            raise GraphError("adjacency must be symmetric")
        adj.flags.writeable = False
        object.__setattr__(self, "adj", adj)
        if self.d is not None:
            sums = adj.sum(axis=1)
            if (sums != self.d).any():
                bad = int(np.flatnonzero(sums != self.d)[0])
                raise GraphError(
                    f"declared degree {self.d} but vertex {bad} has row sum {int(sums[bad])}"
                )

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        return self.adj.sum(axis=1)

    @property
    def is_regular(self) -> bool:
        deg = self.degrees
        return bool((deg == deg[0]).all()) if self.n else True

    @property
    def degree(self) -> int:
        """The common degree; raises for irregular graphs."""
        if self.d is not None:
            return self.d
        if not self.is_regular:
            raise GraphError("graph is not regular")
        return int(self.degrees[0])

    @property
    def loops(self) -> np.ndarray:
        return np.diag(self.adj).copy()

    @property
    def num_edges(self) -> int:
        """Edge count with each loop unit counted once."""
        off = int(np.triu(self.adj, 1).sum())
        return off + int(np.trace(self.adj))

    def edge_list(self) -> list[tuple[int, int, int]]:
        """Sorted ``(u, v, multiplicity)`` with ``u <= v``; loops have ``u == v``."""
        iu, iv = np.nonzero(np.triu(self.adj))
        return [(int(u), int(v), int(self.adj[u, v])) for u, v in zip(iu, iv)]

    def __eq__(self, other):
        if not isinstance(other, RegularGraph):
            return NotImplemented
        return self.d == other.d and np.array_equal(self.adj, other.adj)

    def __hash__(self):
        return hash((self.d, self.adj.tobytes()))

    def __repr__(self):
        return f"RegularGraph(n={self.n}, d={self.d}, edges={self.num_edges})"

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], regular: bool = True):
        adj = np.zeros((n, n), dtype=np.int64)
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                adj[u, u] += 1
            else:
                adj[u, v] += 1
                adj[v, u] += 1
        g = cls(adj)
        if regular:
            return cls(adj, d=g.degree)
        return g


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    n_left: int
    n_right: int
    edges: tuple[tuple[int, int, int], ...]
    right_order: tuple[tuple[int, ...], ...] | None = None
    # degree tags only echo what was declared; they are validated
    left_degree: int | None = None
    right_degree: int | None = None
    _order_is_canonical: bool = field(default=True, repr=False)

    def __post_init__(self):
        merged: Counter = Counter()
        for e in self.edges:
            if len(e) == 2:
                u, v, m = e[0], e[1], 1
            else:
                u, v, m = e
            u, v, m = int(u), int(v), int(m)
            if not (0 <= u < self.n_left):
                raise GraphError(f"left endpoint {u} out of range (n_left={self.n_left})")
            if not (0 <= v < self.n_right):
                raise GraphError(f"right endpoint {v} out of range (n_right={self.n_right})")
            if m < 0:
                raise GraphError("multiplicity must be nonnegative")
            if m:
                merged[(u, v)] += m
        edges = tuple(sorted((u, v, m) for (u, v), m in merged.items()))
        object.__setattr__(self, "edges", edges)

        slots: list[list[int]] = [[] for _ in range(self.n_right)]
        for u, v, m in edges:
            slots[v].extend([u] * m)
        canonical = tuple(tuple(s) for s in slots)
        if self.right_order is None:
            object.__setattr__(self, "right_order", canonical)
        else:
            order = tuple(tuple(int(u) for u in row) for row in self.right_order)
            if len(order) != self.n_right:
                raise GraphError("right_order must have one row per right vertex")
            for v, (row, ref) in enumerate(zip(order, canonical)):
                if sorted(row) != list(ref):
                    raise GraphError(
                        f"right_order[{v}] is not a permutation of the edge slots at {v}"
                    )
            object.__setattr__(self, "right_order", order)
            object.__setattr__(self, "_order_is_canonical", order == canonical)

        if self.left_degree is not None:
            ld = self.left_degrees
            if self.n_left and (ld != self.left_degree).any():
                raise GraphError(f"not {self.left_degree}-left-regular")
        if self.right_degree is not None:
            rd = self.right_degrees
            if self.n_right and (rd != self.right_degree).any():
                raise GraphError(f"right degrees are not all {self.right_degree}")

    # degree profile

    @cached_property
    def left_degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_left, dtype=np.int64)
        for u, _, m in self.edges:
            deg[u] += m
        return deg

    @cached_property
    def right_degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_right, dtype=np.int64)
        for _, v, m in self.edges:
            deg[v] += m
        return deg

    @property
    def is_left_regular(self) -> bool:
        ld = self.left_degrees
        return bool(self.n_left == 0 or (ld == ld[0]).all())

    @property
    def is_biregular(self) -> bool:
        rd = self.right_degrees
        return self.is_left_regular and bool(self.n_right == 0 or (rd == rd[0]).all())

    @property
    def d_left(self) -> int:
        if not self.is_left_regular:
            raise GraphError("graph is not left-regular")
        return int(self.left_degrees[0]) if self.n_left else 0

    @property
    def d_right(self) -> int:
        rd = self.right_degrees
        if self.n_right and not (rd == rd[0]).all():
            raise GraphError("right degrees are not uniform")
        return int(rd[0]) if self.n_right else 0

    @property
    def is_simple(self) -> bool:
        return all(m == 1 for _, _, m in self.edges)

    @property
    def imbalance(self) -> float:
        return self.n_right / self.n_left

    @property
    def num_edges(self) -> int:
        return sum(m for _, _, m in self.edges)

    @property
    def order_is_canonical(self) -> bool:
        return self._order_is_canonical

    # dense and padded views used by the verifiers

    @cached_property
    def matrix(self) -> np.ndarray:
        """``n_left x n_right`` multiplicity matrix (read-only)."""
        m = np.zeros((self.n_left, self.n_right), dtype=np.int64)
        for u, v, k in self.edges:
            m[u, v] = k
        m.flags.writeable = False
        return m

    @cached_property
    def left_nbr_table(self) -> np.ndarray:
        """Row ``u`` lists the right endpoints of u's edges with repetition,
        padded with ``n_right`` to the maximum left degree."""
        width = int(self.left_degrees.max()) if self.n_left else 0
        table = np.full((self.n_left, width), self.n_right, dtype=np.int64)
        fill = np.zeros(self.n_left, dtype=np.int64)
        for u, v, m in self.edges:
            table[u, fill[u]:fill[u] + m] = v
            fill[u] += m
        table.flags.writeable = False
        return table

    def with_right_order(self, order: Sequence[Sequence[int]] | None) -> "BipartiteGraph":
        return BipartiteGraph(self.n_left, self.n_right, self.edges, right_order=order,
                              left_degree=self.left_degree, right_degree=self.right_degree)

    def __eq__(self, other):
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return (self.n_left, self.n_right, self.edges, self.right_order) == (
            other.n_left, other.n_right, other.edges, other.right_order)

    def __hash__(self):
        return hash((self.n_left, self.n_right, self.edges, self.right_order))

    def __repr__(self):
        return (f"BipartiteGraph(n_left={self.n_left}, n_right={self.n_right}, "
                f"edges={self.num_edges})")

    @classmethod
    def from_pairs(cls, n_left: int, n_right: int, pairs: Iterable[tuple[int, int]], **kw):
        return cls(n_left, n_right, tuple((u, v, 1) for u, v in pairs), **kw)

    @classmethod
    def from_matrix(cls, mat, **kw):
        mat = np.asarray(mat, dtype=np.int64)
        iu, iv = np.nonzero(mat)
        edges = tuple((int(u), int(v), int(mat[u, v])) for u, v in zip(iu, iv))
        return cls(mat.shape[0], mat.shape[1], edges, **kw)


@dataclass(frozen=True)
class VertexSubset:
    side: str
    members: tuple[int, ...]

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise GraphError(f"side must be 'left' or 'right', got {self.side!r}")
        mem = tuple(int(x) for x in self.members)
        if any(b <= a for a, b in zip(mem, mem[1:])):
            raise GraphError("members must be strictly increasing")
        object.__setattr__(self, "members", mem)

    @classmethod
    def left(cls, members: Iterable[int]) -> "VertexSubset":
        return cls("left", tuple(sorted(set(members))))

    @classmethod
    def right(cls, members: Iterable[int]) -> "VertexSubset":
        return cls("right", tuple(sorted(set(members))))

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def _left_members(B: BipartiteGraph, S) -> tuple[int, ...]:
    if isinstance(S, VertexSubset):
        if S.side != "left":
            raise GraphError("expected a left subset")
        mem = S.members
    else:
        mem = tuple(sorted(set(int(x) for x in S)))
    if mem and not (0 <= mem[0] and mem[-1] < B.n_left):
        raise GraphError(f"left subset out of range for n_left={B.n_left}")
    return mem


def check_counts(B: BipartiteGraph, S) -> np.ndarray:
    """Total edge multiplicity from ``S`` into each right vertex."""
    mem = _left_members(B, S)
    if not mem:
        return np.zeros(B.n_right, dtype=np.int64)
    return B.matrix[list(mem)].sum(axis=0)


def neighbors(B: BipartiteGraph, S) -> VertexSubset:
    return VertexSubset("right", tuple(int(v) for v in np.flatnonzero(check_counts(B, S) > 0)))


def unique_neighbors(B: BipartiteGraph, S) -> VertexSubset:
    """Right vertices whose total multiplicity into S is exactly 1.

    A double edge to a single member does not count.
    """
    return VertexSubset("right", tuple(int(v) for v in np.flatnonzero(check_counts(B, S) == 1)))


def incidence_edges(G: RegularGraph) -> list[tuple[int, int]]:
    """Edges of a loop-free graph in canonical left-vertex order of the
    incidence graph: by (min endpoint, max endpoint, parallel index)."""
    out = []
    for u, v, m in G.edge_list():
        out.extend([(u, v)] * m)
    return out


def edge_vertex_incidence(G: RegularGraph) -> BipartiteGraph:
    loops = G.loops
    if loops.any():
        raise LoopError({int(v): int(t) for v, t in enumerate(loops) if t})
    pairs = []
    for i, (u, v) in enumerate(incidence_edges(G)):
        pairs.append((i, u))
        pairs.append((i, v))
    return BipartiteGraph.from_pairs(len(pairs) // 2, G.n, pairs)


def strip_loops(G: RegularGraph) -> tuple[RegularGraph, list[int]]:
    deficit = [int(t) for t in G.loops]
    if not any(deficit):
        return G, deficit
    adj = np.array(G.adj)
    np.fill_diagonal(adj, 0)
    stripped = RegularGraph(adj)
    if len(set(deficit)) == 1:
        stripped = RegularGraph(adj, d=stripped.degree)
    return stripped, deficit


def biadjacency_as_graph(B: BipartiteGraph) -> RegularGraph:
    """The bipartite graph as an ordinary graph on left + right vertices."""
    n = B.n_left + B.n_right
    adj = np.zeros((n, n), dtype=np.int64)
    adj[:B.n_left, B.n_left:] = B.matrix
    adj[B.n_left:, :B.n_left] = B.matrix.T
    return RegularGraph(adj)


# canonical text interchange

FORMAT_HEADER = "# unexpand graph v1"


class GraphFormatError(GraphError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


def serialize(obj: RegularGraph | BipartiteGraph) -> str:
    lines = [FORMAT_HEADER]
    if isinstance(obj, RegularGraph):
        lines.append("kind graph")
        lines.append(f"n {obj.n}")
        if obj.d is not None:
            lines.append(f"degree {obj.d}")
        edges = obj.edge_list()
        lines.append(f"edges {len(edges)}")
        lines.extend(f"{u} {v} {m}" for u, v, m in edges)
    elif isinstance(obj, BipartiteGraph):
        lines.append("kind bipartite")
        lines.append(f"left {obj.n_left}")
        lines.append(f"right {obj.n_right}")
        if obj.left_degree is not None:
            lines.append(f"left_degree {obj.left_degree}")
        if obj.right_degree is not None:
            lines.append(f"right_degree {obj.right_degree}")
        lines.append(f"edges {len(obj.edges)}")
        lines.extend(f"{u} {v} {m}" for u, v, m in obj.edges)
        if not obj.order_is_canonical:
            lines.append(f"right_order {obj.n_right}")
            lines.extend(f"{v}: " + " ".join(map(str, row)) if row else f"{v}:"
                         for v, row in enumerate(obj.right_order))
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    return "\n".join(lines) + "\n"


def _ints(tokens, lineno, count=None):
    try:
        vals = [int(t) for t in tokens]
    except ValueError:
        raise GraphFormatError(lineno, f"expected integers, got {' '.join(tokens)!r}")
    if count is not None and len(vals) != count:
        raise GraphFormatError(lineno, f"expected {count} integers, got {len(vals)}")
    return vals


def deserialize(text: str) -> RegularGraph | BipartiteGraph:
    rows = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines())]
    rows = [(i, ln) for i, ln in rows if ln and not ln.startswith("#")]
    pos = 0

    def take(key):
        nonlocal pos
        if pos >= len(rows):
            raise GraphFormatError(rows[-1][0] if rows else 0, f"missing '{key}'")
        lineno, ln = rows[pos]
        parts = ln.split()
        if parts[0] != key:
            raise GraphFormatError(lineno, f"expected '{key}', got '{parts[0]}'")
        pos += 1
        return lineno, parts[1:]

    def peek():
        return rows[pos][1].split()[0] if pos < len(rows) else None

    lineno, rest = take("kind")
    kind = rest[0] if rest else ""
    try:
        if kind == "graph":
            ln, rest = take("n")
            (n,) = _ints(rest, ln, 1)
            d = None
            if peek() == "degree":
                ln, rest = take("degree")
                (d,) = _ints(rest, ln, 1)
            ln, rest = take("edges")
            (m,) = _ints(rest, ln, 1)
            adj = np.zeros((n, n), dtype=np.int64)
            for _ in range(m):
                if pos >= len(rows):
                    raise GraphFormatError(ln, f"expected {m} edge lines")
                ln, body = rows[pos]
                pos += 1
                u, v, k = _ints(body.split(), ln, 3)
                if not (0 <= u < n and 0 <= v < n):
                    raise GraphFormatError(ln, f"edge endpoint out of range for n={n}")
                adj[u, v] += k
                if u != v:
                    adj[v, u] += k
            obj = RegularGraph(adj, d=d)
        elif kind == "bipartite":
            ln, rest = take("left")
            (nl,) = _ints(rest, ln, 1)
            ln, rest = take("right")
            (nr,) = _ints(rest, ln, 1)
            tags = {}
            for key in ("left_degree", "right_degree"):
                if peek() == key:
                    ln, rest = take(key)
                    (tags[key],) = _ints(rest, ln, 1)
            ln, rest = take("edges")
            (m,) = _ints(rest, ln, 1)
            edges = []
            for _ in range(m):
                if pos >= len(rows):
                    raise GraphFormatError(ln, f"expected {m} edge lines")
                ln, body = rows[pos]
                pos += 1
                u, v, k = _ints(body.split(), ln, 3)
                if not (0 <= u < nl):
                    raise GraphFormatError(ln, f"left endpoint {u} out of range (left {nl})")
                if not (0 <= v < nr):
                    raise GraphFormatError(ln, f"right endpoint {v} out of range (right {nr})")
                edges.append((u, v, k))
            order = None
            if peek() == "right_order":
                ln, rest = take("right_order")
                (cnt,) = _ints(rest, ln, 1)
                order = []
                for v in range(cnt):
                    if pos >= len(rows):
                        raise GraphFormatError(ln, "truncated right_order block")
                    ln, body = rows[pos]
                    pos += 1
                    head, _, tail = body.partition(":")
                    if _ints([head], ln, 1)[0] != v:
                        raise GraphFormatError(ln, f"expected right_order row {v}")
                    order.append(_ints(tail.split(), ln))
            obj = BipartiteGraph(nl, nr, tuple(edges), right_order=order, **tags)
        else:
            raise GraphFormatError(lineno, f"unknown kind {kind!r}")
    except GraphFormatError:
        raise
    except GraphError as exc:
        raise GraphFormatError(rows[min(pos, len(rows)) - 1][0], str(exc)) from exc
    if pos != len(rows):
        raise GraphFormatError(rows[pos][0], "trailing content")
    return obj
