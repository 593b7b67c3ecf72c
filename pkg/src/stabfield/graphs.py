"""Simple undirected graphs, the graph families used for graph states, and
the integer promise matrices derived from them.

Vertices are numbered 1..n everywhere in the public interface.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class Axis(str, enum.Enum):
    X = "x"
    Y = "y"
    Z = "z"

    @classmethod
    def parse(cls, value) -> "Axis":
        if isinstance(value, Axis):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown axis {value!r}; expected one of x, y, z") from None


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices 1..n.

    ``edges`` is a sorted tuple of pairs (a, b) with a < b.  Use
    :func:`build_graph` to construct one from arbitrary input.
    """

    n: int
    edges: tuple

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a graph needs at least one vertex")
        for a, b in self.edges:
            if not (1 <= a < b <= self.n):
                raise ValueError(f"edge {(a, b)} is not normalized or out of range")
        if len(set(self.edges)) != len(self.edges):
            raise ValueError("duplicate edges")

    @cached_property
    def _adjacency_lists(self):
        adj = [set() for _ in range(self.n + 1)]
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return tuple(frozenset(s) for s in adj)

    def neighbors(self, a: int, closed: bool = False) -> frozenset:
        """Neighbourhood of vertex ``a``; with ``closed=True`` the vertex itself is included."""
        self._check_vertex(a)
        nb = self._adjacency_lists[a]
        return nb | {a} if closed else nb

    def degree(self, a: int) -> int:
        return len(self.neighbors(a))

    @property
    def max_degree(self) -> int:
        return max(self.degree(a) for a in self.vertices)

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    def isolated_vertices(self) -> list:
        return [a for a in self.vertices if not self._adjacency_lists[a]]

    def _check_vertex(self, a):
        if not (isinstance(a, (int, np.integer)) and 1 <= a <= self.n):
            raise ValueError(f"vertex {a!r} outside 1..{self.n}")

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "Graph":
        return build_graph(int(data["n"]), [tuple(e) for e in data["edges"]])


def build_graph(n: int, edges: Iterable[Sequence[int]]) -> Graph:
    """Validate ``edges`` and return a graph with deduplicated, ordered pairs."""
    if n < 1:
        raise ValueError("a graph needs at least one vertex")
    normalized = set()
    for edge in edges:
        a, b = (int(v) for v in edge)
        if a == b:
            raise ValueError(f"self-loop at vertex {a}")
        for v in (a, b):
            if not 1 <= v <= n:
                raise ValueError(f"vertex {v} outside 1..{n}")
        normalized.add((min(a, b), max(a, b)))
    return Graph(n, tuple(sorted(normalized)))


# --- graph families -------------------------------------------------------

def _check_size(m, what="size"):
    if int(m) != m or m < 1:
        raise ValueError(f"{what} must be a positive integer, got {m!r}")
    return int(m)


def lattice(sizes: Sequence[int], closed: Sequence[bool] | bool = False) -> Graph:
    """Hypercubic lattice with per-dimension boundary conditions.

    Vertex numbering is scan-line (row-major): the first dimension varies
    slowest, so in 2D the site (j1, j2) gets number j2 + (j1 - 1) * m2.
    A closed dimension of size m adds the wrap-around bond only for m >= 3.
    """
    sizes = [_check_size(m) for m in sizes]
    if not sizes:
        raise ValueError("lattice needs at least one dimension")
    if isinstance(closed, bool):
        closed = [closed] * len(sizes)
    closed = list(closed)
    if len(closed) != len(sizes):
        raise ValueError("one boundary flag per dimension is required")

    strides = [int(np.prod(sizes[r + 1:])) for r in range(len(sizes))]
    edges = []
    for site in itertools.product(*(range(m) for m in sizes)):
        index = 1 + sum(j * s for j, s in zip(site, strides))
        for r, m in enumerate(sizes):
            j = site[r]
            if j + 1 < m:
                edges.append((index, index + strides[r]))
            elif closed[r] and m >= 3:
                edges.append((index, index - (m - 1) * strides[r]))
    return build_graph(int(np.prod(sizes)), edges)


def open_chain(m: int) -> Graph:
    return lattice([m], [False])


def closed_chain(m: int) -> Graph:
    return lattice([m], [True])


def ghz_complete(n: int) -> Graph:
    n = _check_size(n)
    return build_graph(n, itertools.combinations(range(1, n + 1), 2))


def ghz_star(n: int) -> Graph:
    n = _check_size(n)
    return build_graph(n, [(1, b) for b in range(2, n + 1)])


def steane5plus1() -> Graph:
    """Closed 5-chain with a sixth vertex joined to all five."""
    ring = closed_chain(5)
    return build_graph(6, list(ring.edges) + [(a, 6) for a in range(1, 6)])


_BOUNDARY_WORDS = {"open": False, "o": False, "closed": True, "c": True, "periodic": True}


def generate(spec: str) -> Graph:
    """Build a graph from a descriptor string.

    Accepted forms::

        open_chain:5   closed_chain:5   ghz_complete:4   ghz_star:4
        steane5plus1   lattice:4x5:open,closed   lattice:3x3x3:closed
    """
    parts = spec.strip().split(":")
    kind = parts[0].lower()
    args = parts[1:]
    try:
        if kind == "steane5plus1" and not args:
            return steane5plus1()
        if kind in ("open_chain", "closed_chain", "ghz_complete", "ghz_star") and len(args) == 1:
            size = int(args[0])
            if size < 1:
                raise ValueError(f"size must be positive in {spec!r}")
            return {
                "open_chain": open_chain,
                "closed_chain": closed_chain,
                "ghz_complete": ghz_complete,
                "ghz_star": ghz_star,
            }[kind](size)
        if kind == "lattice" and 1 <= len(args) <= 2:
            sizes = [int(s) for s in args[0].lower().split("x")]
            if len(args) == 2:
                flags = [_BOUNDARY_WORDS[w.strip().lower()] for w in args[1].split(",")]
                if len(flags) == 1:
                    flags = flags * len(sizes)
            else:
                flags = [False] * len(sizes)
            return lattice(sizes, flags)
    except (KeyError, ValueError) as exc:
        raise ValueError(f"bad graph descriptor {spec!r}: {exc}") from None
    raise ValueError(f"unknown graph descriptor {spec!r}")


# --- integer matrices -----------------------------------------------------

def adjacency_matrix(g: Graph) -> np.ndarray:
    """Symmetric 0/1 adjacency matrix as an ``int64`` array (row/col a-1 for vertex a)."""
    a = np.zeros((g.n, g.n), dtype=np.int64)
    for u, v in g.edges:
        a[u - 1, v - 1] = a[v - 1, u - 1] = 1
    return a


def promise_matrix(g: Graph, axis) -> np.ndarray:
    """Integer matrix of the log-linear system: identity (Z), A (X) or A + 1 (Y)."""
    axis = Axis.parse(axis)
    eye = np.eye(g.n, dtype=np.int64)
    if axis is Axis.Z:
        return eye
    a = adjacency_matrix(g)
    return a if axis is Axis.X else a + eye


def promise_neighbors(g: Graph, axis, a: int) -> frozenset:
    """Vertices whose cosines enter the product for vertex ``a`` under ``axis``."""
    axis = Axis.parse(axis)
    if axis is Axis.Z:
        g._check_vertex(a)
        return frozenset({a})
    return g.neighbors(a, closed=axis is Axis.Y)
