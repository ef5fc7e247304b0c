"""Open-loop cop schedules.

A schedule is an optional deterministic prelude followed by rounds of fixed
length ``L`` repeated forever. The cops are split into independent groups;
at the start of every round each group draws one of its alternatives (a
``(cops, L)`` block of positions) with the given weights. Deterministic
strategies have one group with one alternative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gamblers import GamblerModel
from .graph import Graph, diameter, euler_tour_with_pauses, require_connected, shortest_path
from .sectors import SectorDecomposition


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class CopGroup:
    cops: tuple[int, ...]
    weights: tuple[float, ...]
    positions: np.ndarray  # (alternatives, len(cops), L)

    def __post_init__(self) -> None:
        if self.positions.ndim != 3 or self.positions.shape[:2] != (len(self.weights), len(self.cops)):
            raise ScheduleError("group positions must have shape (alternatives, cops, L)")
        if not math.isclose(math.fsum(self.weights), 1.0, abs_tol=1e-12):
            raise ScheduleError("alternative weights must sum to 1")


@dataclass(frozen=True)
class CopSchedule:
    name: str
    k: int
    round_length: int
    groups: tuple[CopGroup, ...]
    prelude: np.ndarray  # (k, L0), may have L0 == 0

    def __post_init__(self) -> None:
        owned = sorted(c for grp in self.groups for c in grp.cops)
        if owned != list(range(self.k)):
            raise ScheduleError("every cop must belong to exactly one group")
        if any(grp.positions.shape[2] != self.round_length for grp in self.groups):
            raise ScheduleError("all alternatives must share the round length")
        if self.prelude.shape[0] != self.k:
            raise ScheduleError("prelude must have one row per cop")

    @property
    def prelude_length(self) -> int:
        return self.prelude.shape[1]

    @property
    def n_alternatives(self) -> int:
        return math.prod(len(grp.weights) for grp in self.groups)

    @property
    def initial_positions(self) -> tuple[int, ...]:
        if self.prelude_length:
            return tuple(int(v) for v in self.prelude[:, 0])
        first = self.alternative(0)[1][:, 0]
        for i in range(1, self.n_alternatives):
            if not np.array_equal(self.alternative(i)[1][:, 0], first):
                raise ScheduleError("alternatives disagree on the starting positions")
        return tuple(int(v) for v in first)

    def alternative(self, index: int) -> tuple[float, np.ndarray]:
        """Weight and ``(k, L)`` positions of one combined alternative (mixed-radix index)."""
        if not 0 <= index < self.n_alternatives:
            raise IndexError(index)
        out = np.empty((self.k, self.round_length), dtype=np.int64)
        weight = 1.0
        for grp in self.groups:
            index, a = divmod(index, len(grp.weights))
            out[list(grp.cops)] = grp.positions[a]
            weight *= grp.weights[a]
        return weight, out

    def alternatives(self) -> list[tuple[float, np.ndarray]]:
        return [self.alternative(i) for i in range(self.n_alternatives)]

    def combined_positions(self, limit: int = 1 << 16) -> tuple[np.ndarray, np.ndarray]:
        """All combined alternatives at once: weights ``(A,)`` and positions ``(A, k, L)``."""
        if self.n_alternatives > limit:
            raise ScheduleError(f"{self.n_alternatives} alternatives exceed the limit {limit}")
        weights = np.ones(1)
        pos = np.zeros((1, 0, self.round_length), dtype=np.int64)
        order: list[int] = []
        for grp in self.groups:
            a = len(grp.weights)
            weights = np.repeat(np.asarray(grp.weights), weights.size) * np.tile(weights, a)
            block = np.repeat(grp.positions, pos.shape[0], axis=0)
            pos = np.concatenate([np.tile(pos, (a, 1, 1)), block], axis=1)
            order.extend(grp.cops)
        inverse = np.argsort(order)
        return weights, pos[:, inverse, :]

    def validate(self, g: Graph) -> None:
        """Check every cop only sits or crosses an edge between consecutive turns."""

        def ok(a: int, b: int) -> bool:
            return a == b or g.has_edge(a, b)

        def check_rows(rows: np.ndarray, what: str) -> None:
            for c in range(rows.shape[0]):
                for t in range(rows.shape[1] - 1):
                    if not ok(int(rows[c, t]), int(rows[c, t + 1])):
                        raise ScheduleError(f"{what}: cop {c} jumps {rows[c, t]}->{rows[c, t + 1]} at step {t}")

        if np.any(self.prelude < 0) or np.any(self.prelude >= g.n):
            raise ScheduleError("prelude leaves the graph")
        check_rows(self.prelude, "prelude")
        for grp in self.groups:
            if np.any(grp.positions < 0) or np.any(grp.positions >= g.n):
                raise ScheduleError("round positions leave the graph")
            for a in range(len(grp.weights)):
                check_rows(grp.positions[a], f"alternative {a}")
            firsts, lasts = grp.positions[:, :, 0], grp.positions[:, :, -1]
            for i, c in enumerate(grp.cops):
                ends = set(lasts[:, i].tolist())
                if self.prelude_length:
                    ends.add(int(self.prelude[c, -1]))
                for a in ends:
                    for b in set(firsts[:, i].tolist()):
                        if not ok(a, b):
                            raise ScheduleError(f"cop {c} cannot move {a}->{b} between rounds")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "k": self.k,
            "initial_positions": list(self.initial_positions),
            "round_length": self.round_length,
            "prelude": self.prelude.tolist(),
            "groups": [
                {"cops": list(grp.cops), "weights": list(grp.weights), "alternatives": grp.positions.tolist()}
                for grp in self.groups
            ],
        }


def occupied_sets(s: CopSchedule, index: int) -> list[frozenset[int]]:
    """Per-turn set of occupied vertices for one combined alternative."""
    _, pos = s.alternative(index)
    return [frozenset(pos[:, t].tolist()) for t in range(s.round_length)]


def _single(name: str, rows: np.ndarray, prelude: np.ndarray | None = None) -> CopSchedule:
    k, L = rows.shape
    if prelude is None:
        prelude = np.zeros((k, 0), dtype=np.int64)
    grp = CopGroup(tuple(range(k)), (1.0,), rows[None, :, :].astype(np.int64))
    return CopSchedule(name, k, L, (grp,), prelude.astype(np.int64))


def top_k_order(p: np.ndarray) -> np.ndarray:
    """Vertices by decreasing probability, lower index first on ties."""
    return np.lexsort((np.arange(p.size), -np.asarray(p)))


def _as_distribution(d: np.ndarray | GamblerModel) -> np.ndarray:
    if isinstance(d, GamblerModel):
        if not d.is_static:
            raise ScheduleError("top_k_sit needs a static gambler")
        return d.schedule[0]
    return np.asarray(d, dtype=float)


def top_k_sit(d: np.ndarray | GamblerModel, k: int) -> CopSchedule:
    """Each cop sits forever on one of the k most probable vertices.

    With k >= n every vertex gets a cop and the surplus doubles up in the same order.
    """
    p = _as_distribution(d)
    order = top_k_order(p)
    rows = np.array([[order[c % p.size]] for c in range(k)])
    return _single("top_k_sit", rows)


def sit(positions: Sequence[int]) -> CopSchedule:
    return _single("sit", np.array([[v] for v in positions]))


def walk_then_sit(g: Graph, starts: Sequence[int], goals: Sequence[int]) -> CopSchedule:
    """Cop i walks a shortest path from starts[i] to goals[i] and sits there."""
    paths = [shortest_path(g, a, b) for a, b in zip(starts, goals)]
    span = max(len(p) for p in paths)
    prelude = np.array([p + [p[-1]] * (span - len(p)) for p in paths])
    return _single("walk_then_sit", np.array([[p[-1]] for p in paths]), prelude)


def dfs_patrol(dec: SectorDecomposition, g: Graph) -> CopSchedule:
    """Every sector's cops repeat the paused depth-first tour of its tree.

    Each round and each sector independently flips a fair coin between the
    forward tour and its reversal. Shorter tours wait at the root until the
    longest one finishes.
    """
    if dec.n != g.n:
        raise ScheduleError("decomposition and graph disagree on n")
    tours = [euler_tour_with_pauses(sec.tree) for sec in dec.sectors]
    L = max(len(t) for t in tours)
    groups = []
    for i, fwd in enumerate(tours):
        cops = dec.cops_of(i)
        options = [fwd] if fwd == fwd[::-1] else [fwd, fwd[::-1]]
        block = np.array([[o + [o[-1]] * (L - len(o))] * len(cops) for o in options])
        groups.append(CopGroup(cops, tuple(1.0 / len(options) for _ in options), block))
    groups.sort(key=lambda grp: grp.cops[0])
    return CopSchedule("dfs_patrol", dec.k, L, tuple(groups), np.zeros((dec.k, 0), dtype=np.int64))


def part_length(n: int, k: int) -> int:
    """ceil(2n/k + 1)"""
    return -(-(2 * n + k) // k)


def _targets_two_part(dec: SectorDecomposition, scores: np.ndarray) -> list[int]:
    taken: set[int] = set()
    out = []
    for sec in dec.sectors:
        ranked = sorted(sec.vertices, key=lambda v: (-scores[v], v))
        pick = next((v for v in ranked if v not in taken), ranked[0])
        taken.add(pick)
        out.append(pick)
    return out


def changing_two_part(dec: SectorDecomposition, m: GamblerModel, g: Graph) -> CopSchedule:
    """Two-part rounds of Q = ceil(2n/k+1) turns each against a known changing gambler.

    Part one walks inside the sector tree to the vertex with the highest
    average probability over part two; part two sits there. When sectors
    want the same shared vertex the lower sector index keeps it and the
    others fall back to their next best vertex.

    The gambler's period and the round length are folded into a super-period
    of whole rounds; the first super-period (starting from the sector roots)
    is the prelude and the second one repeats forever.
    """
    if dec.n != g.n or m.n != g.n:
        raise ScheduleError("decomposition, gambler and graph disagree on n")
    n, k = g.n, dec.k
    Q = part_length(n, k)
    L = 2 * Q
    rounds = math.lcm(L, m.period) // L
    cur = [sec.shared for sec in dec.sectors]

    def block(first_round: int) -> np.ndarray:
        rows = [[] for _ in dec.sectors]
        for r in range(first_round, first_round + rounds):
            scores = m.matrix(r * L + Q + 1, Q).sum(axis=0)
            for i, (sec, tgt) in enumerate(zip(dec.sectors, _targets_two_part(dec, scores))):
                path = sec.tree.path(cur[i], tgt)
                assert len(path) <= Q, "target farther than one part length"
                rows[i].extend(path[min(j, len(path) - 1)] for j in range(Q))
                rows[i].extend([tgt] * Q)
                cur[i] = tgt
        return np.array([rows[dec.assignment[c]] for c in range(k)])

    prelude = block(0)
    periodic = block(rounds)
    return _single("changing_two_part", periodic, prelude)


def diameter_chase(g: Graph, m: GamblerModel, k: int) -> CopSchedule:
    """Rounds of d = diam(g) turns; each round ends with the cops on the top-k
    vertices of that final turn's distribution.

    Turn 1 places the cops on the top-k vertices of the turn-1 distribution.
    Round i covers turns d*i+2 .. d*(i+1)+1, giving d moves to cover a
    distance of at most d.
    """
    require_connected(g)
    if m.n != g.n:
        raise ScheduleError("gambler and graph disagree on n")
    d = diameter(g)
    if d == 0:
        return _single("diameter_chase", np.zeros((k, 1), dtype=np.int64))

    def targets(turn: int) -> list[int]:
        order = top_k_order(m.distribution_at(turn))
        return [int(order[c % g.n]) for c in range(k)]

    rounds = math.lcm(d, m.period) // d
    cur = targets(1)
    start = [[v] for v in cur]

    def block(first_round: int) -> list[list[int]]:
        rows: list[list[int]] = [[] for _ in range(k)]
        for i in range(first_round, first_round + rounds):
            for c, tgt in enumerate(targets(d * (i + 1) + 1)):
                path = shortest_path(g, cur[c], tgt)
                rows[c].extend(path[min(j, len(path) - 1)] for j in range(1, d + 1))
                cur[c] = tgt
        return rows

    first = block(0)
    prelude = np.array([s + r for s, r in zip(start, first)])
    return _single("diameter_chase", np.array(block(rounds)), prelude)


STRATEGIES = ("top_k_sit", "dfs_patrol", "changing_two_part", "diameter_chase")

