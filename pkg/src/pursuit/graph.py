"""Undirected graphs, rooted trees and the traversals the cop strategies rely on.

Vertices are the integers ``0..n-1``. Everything here is immutable once built.
"""

from __future__ import annotations

import io
import os
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import networkx as nx
import numpy as np

GRAPH_KINDS = ("path", "cycle", "star", "double_star", "grid", "random_tree", "connected_gnp")


class GraphError(ValueError):
    """Raised for malformed graphs or operations that need a connected graph."""


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset[tuple[int, int]]
    adj: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adj[v]

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    @property
    def m(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def build_graph(n: int, edge_list: Iterable[Sequence[int]]) -> Graph:
    """Build a simple undirected graph, dropping duplicate edges.

    Raises GraphError on out-of-range endpoints or self-loops.
    """
    if n < 1:
        raise GraphError(f"a graph needs at least one vertex, got n={n}")
    edges: set[tuple[int, int]] = set()
    for pair in edge_list:
        u, v = int(pair[0]), int(pair[1])
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
        if u == v:
            raise GraphError(f"self-loop at vertex {u}")
        edges.add((min(u, v), max(u, v)))
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    return Graph(n, frozenset(edges), tuple(tuple(sorted(a)) for a in nbrs))


def _bfs(adj: Sequence[Sequence[int]], source: int) -> list[int]:
    dist = [-1] * len(adj)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def is_connected(g: Graph) -> bool:
    return min(_bfs(g.adj, 0)) >= 0


def require_connected(g: Graph) -> None:
    if not is_connected(g):
        raise GraphError("graph is not connected")


def bfs_distances(g: Graph, source: int) -> list[int]:
    """Hop distance from ``source`` to every vertex."""
    dist = _bfs(g.adj, source)
    if min(dist) < 0:
        raise GraphError("graph is not connected")
    return dist


def diameter(g: Graph) -> int:
    require_connected(g)
    return max(max(_bfs(g.adj, s)) for s in range(g.n))


def shortest_path(g: Graph, source: int, target: int) -> list[int]:
    """A shortest path from source to target, lowest-index parents first."""
    parent = [-1] * g.n
    parent[source] = source
    queue = deque([source])
    while queue and parent[target] < 0:
        u = queue.popleft()
        for w in g.adj[u]:
            if parent[w] < 0:
                parent[w] = u
                queue.append(w)
    if parent[target] < 0:
        raise GraphError(f"no path from {source} to {target}")
    path = [target]
    while path[-1] != source:
        path.append(parent[path[-1]])
    return path[::-1]


@dataclass(frozen=True)
class RootedTree:
    """A tree on a subset of a graph's vertices, oriented away from ``root``."""

    root: int
    parent: Mapping[int, int | None]
    children: Mapping[int, tuple[int, ...]]

    @classmethod
    def from_adjacency(cls, tree_adj: Mapping[int, Iterable[int]], root: int) -> RootedTree:
        """Orient an undirected tree given as a vertex -> neighbours map.

        Raises GraphError if the map is not a tree containing ``root``.
        """
        if root not in tree_adj:
            raise GraphError(f"root {root} is not a tree vertex")
        parent: dict[int, int | None] = {root: None}
        children: dict[int, list[int]] = {root: []}
        stack = [root]
        while stack:
            u = stack.pop()
            for w in tree_adj[u]:
                if w == parent[u]:
                    continue
                if w in parent:
                    raise GraphError("adjacency contains a cycle")
                parent[w] = u
                children[u].append(w)
                children[w] = []
                stack.append(w)
        if len(parent) != len(tree_adj):
            raise GraphError("adjacency is not connected")
        return cls(root, parent, {v: tuple(sorted(c)) for v, c in children.items()})

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(self.parent)

    @property
    def size(self) -> int:
        return len(self.parent)

    def __len__(self) -> int:
        return len(self.parent)

    def __contains__(self, v: object) -> bool:
        return v in self.parent

    def neighbors(self, v: int) -> tuple[int, ...]:
        p = self.parent[v]
        return self.children[v] if p is None else tuple(sorted((p, *self.children[v])))

    def edges(self) -> list[tuple[int, int]]:
        return sorted((min(v, p), max(v, p)) for v, p in self.parent.items() if p is not None)

    def adjacency(self) -> dict[int, tuple[int, ...]]:
        return {v: self.neighbors(v) for v in self.parent}

    def induced(self, subset: Iterable[int], root: int) -> RootedTree:
        """The subtree spanned by ``subset``; raises GraphError if it is disconnected."""
        keep = set(subset)
        adj = {v: [w for w in self.neighbors(v) if w in keep] for v in keep}
        return RootedTree.from_adjacency(adj, root)

    def path(self, a: int, b: int) -> list[int]:
        """The unique tree path from a to b."""
        up_a = [a]
        while self.parent[up_a[-1]] is not None:
            up_a.append(self.parent[up_a[-1]])  # type: ignore[arg-type]
        index = {v: i for i, v in enumerate(up_a)}
        up_b = [b]
        while up_b[-1] not in index:
            up_b.append(self.parent[up_b[-1]])  # type: ignore[arg-type]
        return up_a[: index[up_b[-1]]] + up_b[::-1]


def spanning_tree(g: Graph, root: int = 0) -> RootedTree:
    """BFS spanning tree of ``g`` visiting lower-index neighbours first."""
    parent: dict[int, int | None] = {root: None}
    children: dict[int, list[int]] = {root: []}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in g.adj[u]:
            if w not in parent:
                parent[w] = u
                children[u].append(w)
                children[w] = []
                queue.append(w)
    if len(parent) != g.n:
        raise GraphError("graph is not connected")
    return RootedTree(root, parent, {v: tuple(c) for v, c in children.items()})


def euler_tour_with_pauses(t: RootedTree, reversed: bool = False) -> list[int]:
    """Closed depth-first walk of ``t`` from its root, children in ascending order.

    Any vertex the walk occupies fewer than twice gets an extra turn at its
    first occurrence, so every vertex is occupied at least twice per tour.
    ``reversed=True`` returns the exact reversal of the forward walk.
    """
    tour = [t.root]
    stack = [(t.root, iter(t.children[t.root]))]
    while stack:
        v, it = stack[-1]
        child = next(it, None)
        if child is None:
            stack.pop()
            if stack:
                tour.append(stack[-1][0])
        else:
            tour.append(child)
            stack.append((child, iter(t.children[child])))
    counts: dict[int, int] = {}
    for v in tour:
        counts[v] = counts.get(v, 0) + 1
    out: list[int] = []
    paused: set[int] = set()
    for v in tour:
        out.append(v)
        if counts[v] < 2 and v not in paused:
            out.append(v)
            paused.add(v)
    return out[::-1] if reversed else out


def _grid_shape(n: int, rows: int | None) -> tuple[int, int]:
    if rows is None:
        rows = max(r for r in range(1, int(n**0.5) + 1) if n % r == 0)
    if rows < 1 or n % rows:
        raise GraphError(f"grid with {rows} rows cannot have exactly {n} vertices")
    return rows, n // rows


def _random_tree_edges(n: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    if n == 1:
        return []
    if n == 2:
        return [(0, 1)]
    seq = rng.integers(0, n, size=n - 2).tolist()
    return list(nx.from_prufer_sequence(seq).edges())


def generate(
    kind: str,
    n: int,
    seed: int | None = None,
    p: float | None = None,
    rows: int | None = None,
) -> Graph:
    """Deterministic benchmark graphs.

    ``random_tree`` decodes a uniform Prüfer sequence. ``connected_gnp``
    overlays G(n, p) edges on a random tree so the result is always connected.
    ``double_star`` joins the centres of two stars of sizes ceil(n/2), floor(n/2).
    """
    if kind not in GRAPH_KINDS:
        raise GraphError(f"unknown graph kind {kind!r}; expected one of {GRAPH_KINDS}")
    if n < 1:
        raise GraphError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    if kind == "path":
        edges = [(i, i + 1) for i in range(n - 1)]
    elif kind == "cycle":
        if n < 3:
            raise GraphError("a simple cycle needs n >= 3")
        edges = [(i, (i + 1) % n) for i in range(n)]
    elif kind == "star":
        edges = [(0, i) for i in range(1, n)]
    elif kind == "double_star":
        if n < 2:
            raise GraphError("a double star needs n >= 2")
        a = (n + 1) // 2
        edges = [(0, a)] + [(0, i) for i in range(1, a)] + [(a, i) for i in range(a + 1, n)]
    elif kind == "grid":
        r, c = _grid_shape(n, rows)
        edges = [(i * c + j, i * c + j + 1) for i in range(r) for j in range(c - 1)]
        edges += [(i * c + j, (i + 1) * c + j) for i in range(r - 1) for j in range(c)]
    elif kind == "random_tree":
        edges = _random_tree_edges(n, rng)
    else:
        if p is None or not 0.0 <= p <= 1.0:
            raise GraphError(f"connected_gnp needs p in [0, 1], got {p}")
        edges = _random_tree_edges(n, rng)
        iu, ju = np.triu_indices(n, k=1)
        keep = rng.random(iu.size) < p
        edges += list(zip(iu[keep].tolist(), ju[keep].tolist()))
    return build_graph(n, edges)


def write_edge_list(g: Graph, dest: str | os.PathLike | io.TextIOBase) -> None:
    """First line ``n``, then one ``u v`` line per edge in sorted order."""
    text = "\n".join([str(g.n)] + [f"{u} {v}" for u, v in g.sorted_edges()]) + "\n"
    if isinstance(dest, io.TextIOBase):
        dest.write(text)
    else:
        with open(dest, "w") as fh:
            fh.write(text)


def parse_edge_list(text: str) -> Graph:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise GraphError("empty edge-list file")
    n = int(lines[0])
    pairs = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise GraphError(f"bad edge line {ln!r}")
        pairs.append((int(parts[0]), int(parts[1])))
    return build_graph(n, pairs)


def read_edge_list(path: str | os.PathLike) -> Graph:
    with open(path) as fh:
        return parse_edge_list(fh.read())


def to_dot(g: Graph, name: str = "G") -> str:
    body = [f"  {v};" for v in range(g.n)] + [f"  {u} -- {v};" for u, v in g.sorted_edges()]
    return "graph " + name + " {\n" + "\n".join(body) + "\n}\n"
