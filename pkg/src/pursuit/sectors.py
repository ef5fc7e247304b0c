"""Split a connected graph into at most k connected sectors of size at most 2n/k + 1.

A spanning tree is peeled repeatedly: each peel cuts off a connected piece
``S`` whose size lies in ``(x, 2x - 1]`` for ``x = n/k + 1``, keeping one
vertex ``v`` of ``S`` in the residual tree so that the residue stays
connected. All size comparisons are done in integer arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .graph import Graph, GraphError, RootedTree, require_connected, spanning_tree


@dataclass(frozen=True)
class Threshold:
    """The rational threshold ``x = numerator / denominator``."""

    numerator: int
    denominator: int

    def __post_init__(self) -> None:
        if self.denominator < 1:
            raise ValueError("threshold denominator must be >= 1")

    @classmethod
    def for_cops(cls, n: int, k: int) -> Threshold:
        return cls(n + k, k)

    def exceeds(self, size: int) -> bool:
        """size > x"""
        return self.denominator * size > self.numerator

    def fits(self, size: int) -> bool:
        """size <= 2x - 1"""
        return self.denominator * size <= 2 * self.numerator - self.denominator

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)


@dataclass(frozen=True)
class Sector:
    vertices: frozenset[int]
    shared: int
    tree: RootedTree

    @property
    def size(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class SectorDecomposition:
    n: int
    k: int
    sectors: tuple[Sector, ...]
    assignment: tuple[int, ...]  # cop index -> sector index

    def cops_of(self, sector_index: int) -> tuple[int, ...]:
        return tuple(c for c, s in enumerate(self.assignment) if s == sector_index)

    def shared_vertices(self) -> frozenset[int]:
        return frozenset(s.shared for s in self.sectors)

    def validate(self, g: Graph) -> None:
        """Assert every structural invariant; raises AssertionError on failure."""
        assert g.n == self.n, "decomposition built for a different graph"
        assert 1 <= len(self.sectors) <= self.k, f"{len(self.sectors)} sectors for k={self.k}"
        covered: set[int] = set()
        for sec in self.sectors:
            covered |= sec.vertices
        assert covered == set(range(self.n)), "sectors do not cover every vertex"
        bound = Threshold.for_cops(self.n, self.k)
        shared = self.shared_vertices()
        for i, si in enumerate(self.sectors):
            assert si.shared in si.vertices
            assert bound.fits(si.size), f"sector {i} has {si.size} > 2n/k+1 vertices"
            assert si.tree.vertices == si.vertices and si.tree.root == si.shared
            assert all(g.has_edge(u, v) for u, v in si.tree.edges())
            for sj in self.sectors[i + 1 :]:
                assert si.vertices & sj.vertices <= shared, "sectors overlap off a shared vertex"
        assert len(self.assignment) == self.k
        assert set(self.assignment) == set(range(len(self.sectors))), "a sector has no cop"

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "sectors": [
                {"vertices": sorted(s.vertices), "shared": s.shared, "tree_edges": s.tree.edges()}
                for s in self.sectors
            ],
            "assignment": list(self.assignment),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def branches_at(t: RootedTree, u: int) -> list[frozenset[int]]:
    """All branches ``{u} | C`` for components C of t - u, largest first.

    Equal sizes are ordered by the smallest vertex they contain.
    """
    out = []
    for w in t.neighbors(u):
        seen = {u, w}
        stack = [w]
        while stack:
            a = stack.pop()
            for b in t.neighbors(a):
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
        out.append(frozenset(seen))
    out.sort(key=lambda b: (-len(b), min(b - {u})))
    return out


def largest_branch(t: RootedTree, u: int) -> frozenset[int]:
    if u not in t:
        raise GraphError(f"vertex {u} is not in the tree")
    branches = branches_at(t, u)
    return branches[0] if branches else frozenset({u})


def _select(t: RootedTree, x: Threshold) -> tuple[frozenset[int], int]:
    cur = t
    while True:
        if x.fits(cur.size):
            return cur.vertices, cur.root
        # The branch point is always the current root, so a piece cut from
        # deep inside the recursion never swallows the vertex that links it
        # back to the rest of the tree.
        u = cur.root
        branches = branches_at(cur, u)
        big = branches[0]
        if not x.fits(len(big)):
            (r,) = (w for w in cur.children[u] if w in big)
            cur = cur.induced(big - {u}, r)
            assert x.exceeds(cur.size), "threshold below 2 breaks the recursion"
            continue
        if x.exceeds(len(big)):
            return big, u
        acc = set(big)
        for b in branches[1:]:
            acc |= b
            if x.exceeds(len(acc)):
                break
        return frozenset(acc), u


def peel_sector(t: RootedTree, x: Threshold) -> tuple[frozenset[int], int, RootedTree]:
    """Cut one sector off ``t``.

    Returns ``(S, v, remainder)`` with ``x < |S| <= 2x - 1``, ``S`` connected
    in ``t``, and ``remainder`` the subtree on ``(V - S) | {v}`` keeping the
    root of ``t``.
    """
    if not x.exceeds(t.size):
        raise ValueError(f"tree of size {t.size} is not larger than the threshold")
    s, v = _select(t, x)
    assert x.exceeds(len(s)) and x.fits(len(s)), f"peeled sector size {len(s)} out of range"
    t.induced(s, v)  # raises if the sector is disconnected
    rest = (t.vertices - s) | {v}
    assert t.root in rest
    remainder = t.induced(rest, t.root)
    return s, v, remainder


def decompose(g: Graph, k: int) -> SectorDecomposition:
    """Sector decomposition of ``g`` for ``k`` cops (requires n > k >= 1).

    Surplus cops are dealt round-robin onto the sectors in index order.
    """
    if k < 1:
        raise ValueError("need at least one cop")
    if g.n <= k:
        raise ValueError(f"n={g.n} <= k={k}: place one cop on every vertex instead")
    require_connected(g)
    tree = spanning_tree(g, 0)
    x = Threshold.for_cops(g.n, k)
    sectors: list[Sector] = []
    cur = tree
    while x.exceeds(cur.size):
        s, v, cur = peel_sector(cur, x)
        sectors.append(Sector(s, v, tree.induced(s, v)))
    sectors.append(Sector(cur.vertices, cur.root, cur))
    assert len(sectors) <= k, f"{len(sectors)} sectors exceed k={k}"
    assignment = tuple(c % len(sectors) for c in range(k))
    return SectorDecomposition(g.n, k, tuple(sectors), assignment)


def induced_connected(g: Graph, vertices: frozenset[int] | set[int]) -> bool:
    """Whether ``vertices`` induce a connected subgraph of ``g``."""
    if not vertices:
        return False
    start = next(iter(vertices))
    seen = {start}
    stack = [start]
    while stack:
        a = stack.pop()
        for b in g.neighbors(a):
            if b in vertices and b not in seen:
                seen.add(b)
                stack.append(b)
    return len(seen) == len(vertices)

