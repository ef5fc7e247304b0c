"""Gambler models: one distribution per turn, cycling through a finite schedule.

Turn ``t`` (1-based) uses ``schedule[(t - 1) % period]``. A static gambler
has period 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .graph import Graph, bfs_distances, spanning_tree

SUM_TOLERANCE = 1e-12


class DistributionError(ValueError):
    pass


def normalize(p: Iterable[float | str | Fraction]) -> np.ndarray:
    """Validate a probability vector and rescale it so ``math.fsum`` gives exactly 1.

    Entries may be floats, Fractions or decimal strings.
    """
    vals = [float(Fraction(x)) if isinstance(x, str) else float(x) for x in p]
    arr = np.asarray(vals, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DistributionError("a distribution needs at least one entry")
    if not np.all(np.isfinite(arr)):
        raise DistributionError("non-finite probability")
    if np.any(arr < 0):
        raise DistributionError(f"negative probability at vertex {int(np.argmin(arr))}")
    total = math.fsum(arr)
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise DistributionError(f"probabilities sum to {total!r}, not 1")
    arr = arr / total
    top = int(np.argmax(arr))
    for _ in range(4):
        resid = 1.0 - math.fsum(arr)
        if resid == 0.0:
            break
        arr[top] += resid
    arr.setflags(write=False)
    return arr


def _cdf(p: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(p)
    last = int(np.flatnonzero(p)[-1])
    cdf[last:] = 1.0
    return cdf


@dataclass(frozen=True)
class GamblerModel:
    schedule: tuple[np.ndarray, ...]
    name: str = "gambler"
    _cdfs: tuple[np.ndarray, ...] = field(default=(), repr=False, compare=False)
    _stack: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.schedule:
            raise DistributionError("empty schedule")
        n = self.schedule[0].size
        if any(d.size != n for d in self.schedule):
            raise DistributionError("schedule distributions have different lengths")
        object.__setattr__(self, "_cdfs", tuple(_cdf(d) for d in self.schedule))
        object.__setattr__(self, "_stack", np.stack(self.schedule))

    @property
    def n(self) -> int:
        return self.schedule[0].size

    @property
    def period(self) -> int:
        return len(self.schedule)

    @property
    def is_static(self) -> bool:
        return self.period == 1

    def distribution_at(self, turn: int) -> np.ndarray:
        if turn < 1:
            raise ValueError("turns are numbered from 1")
        return self.schedule[(turn - 1) % self.period]

    def matrix(self, first_turn: int, length: int) -> np.ndarray:
        """Rows are the distributions for turns first_turn .. first_turn+length-1."""
        idx = np.arange(first_turn - 1, first_turn - 1 + length) % self.period
        return self._stack[idx]

    def cdf_at(self, turn: int) -> np.ndarray:
        return self._cdfs[(turn - 1) % self.period]

    def to_dict(self) -> dict:
        return {"name": self.name, "schedule": [d.tolist() for d in self.schedule]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def make_static(p: Sequence[float | str | Fraction], name: str = "static") -> GamblerModel:
    return GamblerModel((normalize(p),), name)


def make_changing(schedule: Sequence[Sequence[float | str | Fraction]], name: str = "changing") -> GamblerModel:
    if len(schedule) == 0:
        raise DistributionError("empty schedule")
    return GamblerModel(tuple(normalize(p) for p in schedule), name)


def from_json(text: str) -> GamblerModel:
    """Parse ``{"schedule": [[p, ...], ...]}``; entries may be decimal strings."""
    data = json.loads(text)
    return make_changing(data["schedule"], data.get("name", "json"))


def sample(m: GamblerModel, turn: int, rng: np.random.Generator) -> int:
    """One gambler position for ``turn``."""
    return int(np.searchsorted(m.cdf_at(turn), rng.random(), side="right"))


def sample_many(m: GamblerModel, turn: int, rng: np.random.Generator, size: int) -> np.ndarray:
    return np.searchsorted(m.cdf_at(turn), rng.random(size), side="right")


def uniform(n: int) -> GamblerModel:
    return make_static(np.full(n, 1.0 / n), "uniform")


def point_mass(n: int, v: int, name: str | None = None) -> GamblerModel:
    p = np.zeros(n)
    p[v] = 1.0
    return make_static(p, name or f"point{v}")


def adversarial_suite(g: Graph, k: int, seed: int = 0) -> list[GamblerModel]:
    """Deterministic corpus of static gamblers for benchmarking strategies on ``g``.

    uniform; point mass on the vertex farthest from 0; mass doubling with BFS
    depth; uniform on the BFS-tree leaves; two seeded random distributions
    (dense Dirichlet and sparse). ``k`` sizes the sparse support.
    """
    n = g.n
    depth = np.asarray(bfs_distances(g, 0), dtype=float)
    far = int(np.argmax(depth))
    suite = [uniform(n), point_mass(n, far, "eccentric")]

    geo = np.exp2(depth - depth.max())
    suite.append(make_static(geo / math.fsum(geo), "geometric"))

    tree = spanning_tree(g, 0)
    leaves = [v for v in range(n) if v != tree.root and not tree.children[v]]
    if leaves:
        p = np.zeros(n)
        p[leaves] = 1.0 / len(leaves)
        suite.append(make_static(p / math.fsum(p), "leaves"))

    rng = np.random.default_rng([seed, n, k])
    dense = rng.dirichlet(np.ones(n))
    suite.append(make_static(dense / math.fsum(dense), "dirichlet"))
    support = rng.choice(n, size=min(n, k + 1), replace=False)
    sparse = np.zeros(n)
    sparse[support] = rng.random(support.size) + 0.05
    suite.append(make_static(sparse / math.fsum(sparse), "sparse"))
    return suite


def random_schedule(n: int, period: int, rng: np.random.Generator, name: str | None = None) -> GamblerModel:
    """Periodic gambler with independently drawn distributions, half of them sparse."""
    rows = []
    for i in range(period):
        if i % 2:
            p = np.zeros(n)
            support = rng.choice(n, size=max(1, n // 10), replace=False)
            p[support] = rng.random(support.size) + 0.05
        else:
            p = rng.dirichlet(np.full(n, 0.5))
        rows.append(p / math.fsum(p))
    return make_changing(rows, name or f"periodic{period}")


def rotating_point_mass(n: int, step: int = 1) -> GamblerModel:
    """Point mass that moves to vertex ``(t - 1) * step mod n`` on turn t."""
    rows = []
    for i in range(n):
        p = np.zeros(n)
        p[(i * step) % n] = 1.0
        rows.append(p)
    return make_changing(rows, f"rotating{step}")


def changing_suite(g: Graph, k: int, round_length: int, seed: int = 0) -> list[GamblerModel]:
    """Periodic gamblers with periods 1, 2 and ``round_length``, plus a rotating point mass."""
    rng = np.random.default_rng([seed, g.n, k, round_length])
    suite = [random_schedule(g.n, p, rng) for p in sorted({1, 2, round_length})]
    suite.append(rotating_point_mass(g.n, step=max(1, g.n // 3)))
    return suite
