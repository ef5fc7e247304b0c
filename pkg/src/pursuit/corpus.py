"""Benchmark instances and per-row evaluation against the capture-time bounds."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterator

import numpy as np

from . import gamblers as gm
from .engine import capture_probs, evaluate, monte_carlo, round_evasion_bound_check
from .gamblers import GamblerModel
from .graph import Graph, diameter, generate
from .sectors import decompose
from .strategies import (
    CopSchedule,
    changing_two_part,
    diameter_chase,
    dfs_patrol,
    part_length,
    top_k_sit,
)

COLUMNS = ("graph_kind", "n", "k", "strategy", "gambler", "exact_E", "mc_mean", "mc_ci", "bound", "pass")
SUITES = ("known", "unknown", "changing", "diameter")
KNOWN_SLACK = 1e-9


class IncompatibleConfig(ValueError):
    pass


@dataclass(frozen=True)
class Instance:
    graph_kind: str
    graph: Graph
    k: int
    strategy: str
    gambler: GamblerModel


@dataclass
class Row:
    graph_kind: str
    n: int
    k: int
    strategy: str
    gambler: str
    exact_E: float
    bound: float
    passed: bool
    mc_mean: float | None = None
    mc_ci: float | None = None
    status: str = "pass"
    extra: dict = field(default_factory=dict)

    def csv_fields(self) -> list[str]:
        def fmt(x: float | None) -> str:
            return "" if x is None else repr(float(x))

        return [
            self.graph_kind,
            str(self.n),
            str(self.k),
            self.strategy,
            self.gambler,
            fmt(self.exact_E),
            fmt(self.mc_mean),
            fmt(self.mc_ci),
            fmt(self.bound),
            "true" if self.passed else "false",
        ]

    def to_dict(self) -> dict:
        return asdict(self)


def bound_for(strategy: str, n: int, k: int, d: int | None = None) -> float:
    if strategy == "top_k_sit":
        return max(1.0, n / k)
    if strategy == "dfs_patrol":
        return 3.94 * n / k + 1.16
    if strategy == "changing_two_part":
        return 6.33 * n / k + 3.17
    if strategy == "diameter_chase":
        assert d is not None
        return 1 + d * n / k
    if strategy == "walk_then_sit":
        return float(n)
    raise IncompatibleConfig(f"unknown strategy {strategy!r}")


def build_schedule(strategy: str, g: Graph, k: int, m: GamblerModel) -> CopSchedule:
    if strategy == "top_k_sit":
        if not m.is_static:
            raise IncompatibleConfig("top_k_sit needs a static (known) gambler")
        return top_k_sit(m, k)
    if strategy in ("dfs_patrol", "changing_two_part") and g.n <= k:
        raise IncompatibleConfig(f"{strategy} needs n > k (got n={g.n}, k={k})")
    if strategy == "dfs_patrol":
        if not m.is_static:
            raise IncompatibleConfig("dfs_patrol is evaluated against static (unknown) gamblers")
        return dfs_patrol(decompose(g, k), g)
    if strategy == "changing_two_part":
        return changing_two_part(decompose(g, k), m, g)
    if strategy == "diameter_chase":
        return diameter_chase(g, m, k)
    raise IncompatibleConfig(f"unknown strategy {strategy!r}")


def evaluate_instance(inst: Instance, trials: int = 0, seed: int = 0) -> Row:
    g, k, m = inst.graph, inst.k, inst.gambler
    sched = build_schedule(inst.strategy, g, k, m)
    sched.validate(g)
    value = evaluate(capture_probs(g, sched, m))
    d = diameter(g) if inst.strategy == "diameter_chase" else None
    bound = bound_for(inst.strategy, g.n, k, d)
    slack = KNOWN_SLACK if inst.strategy == "top_k_sit" else 0.0
    passed = value.expected <= bound + slack
    row = Row(inst.graph_kind, g.n, k, inst.strategy, m.name, value.expected, bound, passed)
    row.extra["survival"] = value.survival
    row.extra["period"] = value.period
    if d is not None:
        row.extra["diameter"] = d
    if inst.strategy == "dfs_patrol":
        check = round_evasion_bound_check(m, sched)
        row.extra["evasion"] = check.survival
        row.extra["evasion_bound"] = check.product_bound
        row.passed = row.passed and check.holds
    if not row.passed:
        row.status = "move-gap" if inst.strategy == "diameter_chase" else "fail"
    if trials > 0:
        stats = monte_carlo(g, sched, m, trials, seed)
        row.mc_mean, row.mc_ci = stats.mean, stats.half_width
    return row


def _graph(kind: str, n: int, seed: int) -> Graph:
    if kind == "connected_gnp":
        return generate(kind, n, seed=seed, p=min(1.0, 2.0 / n))
    return generate(kind, n, seed=seed)


UNKNOWN_KINDS = ("path", "star", "cycle", "grid", "random_tree", "connected_gnp")
SIZES = (30, 100, 300)
COP_COUNTS = (1, 2, 5, 10)


def unknown_suite(seed: int = 0) -> Iterator[Instance]:
    """Every graph family x n x k against the static adversarial corpus."""
    for kind in UNKNOWN_KINDS:
        for n in SIZES:
            g = _graph(kind, n, seed)
            for k in COP_COUNTS:
                if k < n:
                    for m in gm.adversarial_suite(g, k, seed):
                        yield Instance(kind, g, k, "dfs_patrol", m)


def changing_suite(seed: int = 0) -> Iterator[Instance]:
    """Periodic gamblers with periods 1, 2 and the round length on the same graph families."""
    for kind in UNKNOWN_KINDS:
        for n in SIZES:
            g = _graph(kind, n, seed)
            for k in COP_COUNTS:
                if k < n:
                    L = 2 * part_length(n, k)
                    for m in gm.changing_suite(g, k, L, seed):
                        yield Instance(kind, g, k, "changing_two_part", m)


def known_suite(seed: int = 0, count: int = 500) -> Iterator[Instance]:
    """Random connected graphs (n <= 100) with random distributions and k < n."""
    rng = np.random.default_rng([seed, 4])
    kinds = ("random_tree", "connected_gnp", "path", "star", "cycle", "grid")
    for i in range(count):
        kind = kinds[i % len(kinds)]
        n = int(rng.integers(3 if kind == "cycle" else 2, 101))
        g = generate(kind, n, seed=int(rng.integers(2**31)), p=float(rng.uniform(0.01, 0.2)))
        k = int(rng.integers(1, n))
        shape = ("dirichlet", "sparse", "peaked")[i % 3]
        if shape == "dirichlet":
            p = rng.dirichlet(np.full(n, float(rng.uniform(0.1, 2.0))))
        elif shape == "sparse":
            p = np.zeros(n)
            support = rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False)
            p[support] = rng.random(support.size) + 1e-3
        else:
            p = np.exp(-rng.exponential(3.0, size=n) * 5)
        m = gm.make_static(p / math.fsum(p), f"{shape}{i}")
        yield Instance(kind, g, k, "top_k_sit", m)


def _small_diameter_graphs(seed: int) -> Iterator[tuple[str, Graph]]:
    for n in (10, 25, 60, 120):
        yield "star", generate("star", n)
        yield "double_star", generate("double_star", n)
        g = generate("connected_gnp", n, seed=seed, p=min(1.0, 4.0 * math.log(n) / n))
        assert diameter(g) <= 6, f"gnp draw with diameter {diameter(g)}"
        yield "connected_gnp", g


def diameter_suite(seed: int = 0) -> Iterator[Instance]:
    """Diameter <= 6 graphs against static and periodic (P in 1, 2, 3, d) gamblers."""
    for kind, g in _small_diameter_graphs(seed):
        d = diameter(g)
        rng = np.random.default_rng([seed, g.n, d])
        for k in COP_COUNTS:
            if k >= g.n:
                continue
            models = gm.adversarial_suite(g, k, seed)
            models += [gm.random_schedule(g.n, p, rng) for p in sorted({1, 2, 3, d})]
            models.append(gm.rotating_point_mass(g.n, step=max(1, g.n // 3)))
            for m in models:
                yield Instance(kind, g, k, "diameter_chase", m)


SUITE_BUILDERS = {
    "known": known_suite,
    "unknown": unknown_suite,
    "changing": changing_suite,
    "diameter": diameter_suite,
}


def suite_instances(name: str, seed: int = 0) -> list[Instance]:
    if name == "all":
        return [inst for s in SUITES for inst in SUITE_BUILDERS[s](seed)]
    if name not in SUITE_BUILDERS:
        raise IncompatibleConfig(f"unknown suite {name!r}; expected one of {SUITES + ('all',)}")
    return list(SUITE_BUILDERS[name](seed))


def worst_ratios(rows: list[Row]) -> dict[str, float]:
    """Largest E / (n/k) per strategy."""
    out: dict[str, float] = {}
    for r in rows:
        ratio = r.exact_E / (r.n / r.k)
        out[r.strategy] = max(out.get(r.strategy, 0.0), ratio)
    return out
