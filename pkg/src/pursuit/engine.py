"""Game semantics, exact expected capture time and Monte Carlo simulation.

Each turn the gambler draws a vertex from that turn's distribution,
independently of everything else, and is caught iff some cop occupies that
vertex on the same turn. Turns are numbered from 1.

Because the schedules are open loop and rounds draw their alternatives
independently, capture time is a renewal process over rounds:
``E[T] = (beta + L * alpha) / (1 - alpha)`` where ``alpha`` is the mean
probability of surviving a round and ``beta`` the mean of ``j * 1{caught at
turn j of the round}``. The evaluator uses the capture mass ``sum_j
q_j * prod_{s<j}(1 - q_s)`` for ``1 - alpha`` so nothing cancels.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .gamblers import GamblerModel
from .graph import Graph
from .strategies import CopSchedule

TURN_CAP = 10**7
MC_BLOCK = 4096
DEGENERATE = 1e-15


class NeverCaptured(RuntimeError):
    """The gambler survives every round with probability one."""


class Degenerate(ArithmeticError):
    """Per-round capture probability too small to evaluate reliably."""


@dataclass(frozen=True)
class RoundProfile:
    weights: np.ndarray  # (A,)
    q: np.ndarray  # (A, L) per-turn capture probabilities


@dataclass(frozen=True)
class CaptureProfile:
    """Capture probabilities of a schedule against a gambler.

    ``prelude`` covers the first turns; afterwards the super-round made of
    ``rounds`` (consecutive rounds, each with independent alternatives)
    repeats forever.
    """

    prelude: np.ndarray
    rounds: tuple[RoundProfile, ...]
    round_length: int

    @property
    def period(self) -> int:
        return self.round_length * len(self.rounds)


@dataclass(frozen=True)
class ExactValue:
    expected: float | Fraction
    survival: float | Fraction  # per super-round
    period: int
    prelude_length: int = 0
    error_bound: float = 0.0


@dataclass(frozen=True)
class GameOutcome:
    capture_turn: int
    vertex: int
    trace: tuple[tuple[int, frozenset[int]], ...] | None = None


@dataclass(frozen=True)
class CaptureStats:
    trials: int
    mean: float
    sd: float
    half_width: float
    seed: int

    @classmethod
    def from_samples(cls, turns: np.ndarray, seed: int) -> CaptureStats:
        trials = int(turns.size)
        mean = float(turns.mean())
        sd = float(turns.std(ddof=1)) if trials > 1 else 0.0
        return cls(trials, mean, sd, 1.96 * sd / math.sqrt(trials), seed)


def _union_mass(pos: np.ndarray, dist: np.ndarray) -> np.ndarray:
    """Probability mass of the occupied set per turn.

    pos: (..., cops, L) vertex indices; dist: (L, n). Cops on the same vertex count once.
    """
    srt = np.sort(pos, axis=-2)
    fresh = np.ones(srt.shape, dtype=bool)
    fresh[..., 1:, :] = srt[..., 1:, :] != srt[..., :-1, :]
    turn = np.arange(dist.shape[0])
    mass = dist[turn, srt] * fresh
    # a cover of the whole support captures surely; float sums can fall short of 1
    covered = ((mass > 0).sum(axis=-2)) == np.count_nonzero(dist, axis=-1)
    return np.where(covered, 1.0, np.clip(mass.sum(axis=-2), 0.0, 1.0))


def capture_probs(g: Graph | None, s: CopSchedule, m: GamblerModel) -> CaptureProfile:
    """Per-turn capture probabilities, expanded to the common period of schedule and gambler."""
    if g is not None and g.n != m.n:
        raise ValueError("gambler and graph disagree on n")
    L0, L = s.prelude_length, s.round_length
    prelude = _union_mass(s.prelude, m.matrix(1, L0)) if L0 else np.zeros(0)
    weights, pos = s.combined_positions()
    rounds = []
    for r in range(math.lcm(L, m.period) // L):
        rounds.append(RoundProfile(weights, _union_mass(pos, m.matrix(L0 + r * L + 1, L))))
    return CaptureProfile(prelude, tuple(rounds), L)


def _segment_float(q: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(capture mass, beta, survival) for each row of q, in extended precision."""
    q = np.asarray(q, dtype=np.longdouble)
    surv = np.cumprod(1 - q, axis=-1)
    before = np.concatenate([np.ones(q.shape[:-1] + (1,), dtype=np.longdouble), surv[..., :-1]], axis=-1)
    caught = q * before
    j = np.arange(1, q.shape[-1] + 1, dtype=np.longdouble)
    return caught.sum(axis=-1), (caught * j).sum(axis=-1), surv[..., -1]


def _segment_exact(q: Sequence[Fraction]) -> tuple[Fraction, Fraction, Fraction]:
    surv, mass, beta = Fraction(1), Fraction(0), Fraction(0)
    for j, qj in enumerate(q, start=1):
        mass += qj * surv
        beta += j * qj * surv
        surv *= 1 - qj
    return mass, beta, surv


def _combine(prelude_stats, round_stats, L: int, L0: int):
    """Expected capture time from prelude and super-round (mass, beta, survival) triples."""
    c_pre, b_pre, a_pre = prelude_stats
    zero = c_pre * 0
    c_sup, b_sup, alive = zero, zero, zero + 1
    for i, (c, b, a) in enumerate(round_stats):
        c_sup += alive * c
        b_sup += alive * (i * L * c + b)
        alive *= a
    if a_pre == 0:
        return b_pre, alive
    if c_sup == 0:
        raise NeverCaptured("the gambler is never caught: every round has zero capture probability")
    if c_sup < DEGENERATE:
        raise Degenerate(f"per-round capture probability {float(c_sup):.3g} is numerically degenerate")
    periodic = (b_sup + len(round_stats) * L * alive) / c_sup
    return b_pre + a_pre * (L0 + periodic), alive


def evaluate(profile: CaptureProfile) -> ExactValue:
    """Expected capture time of a capture profile, in extended precision."""
    L, L0 = profile.round_length, profile.prelude.size
    pre = _segment_float(profile.prelude[None, :]) if L0 else (np.zeros(1), np.zeros(1), np.ones(1))
    pre = tuple(np.longdouble(x[0]) for x in pre)
    stats = []
    for rp in profile.rounds:
        c, b, a = _segment_float(rp.q)
        w = np.asarray(rp.weights, dtype=np.longdouble)
        stats.append(((w * c).sum(), (w * b).sum(), (w * a).sum()))
    value, alive = _combine(pre, stats, L, L0)
    terms = L0 + profile.period * max(len(rp.weights) for rp in profile.rounds)
    err = float(value) * (4 * terms + 16) * float(np.finfo(np.longdouble).eps)
    return ExactValue(float(value), float(alive), profile.period, L0, err)


def exact_expected_time(per_round: Sequence[tuple[float | Fraction, Sequence[float | Fraction]]]) -> ExactValue:
    """Expected capture time when every round draws alternative o with weight w_o.

    ``per_round`` is a list of ``(w_o, (q_1, ..., q_L))``. Fractions in, Fraction out.
    """
    if not per_round:
        raise ValueError("need at least one alternative")
    lengths = {len(q) for _, q in per_round}
    if len(lengths) != 1 or 0 in lengths:
        raise ValueError("all alternatives need the same positive round length")
    (L,) = lengths
    if all(isinstance(w, Fraction) and all(isinstance(x, Fraction) for x in q) for w, q in per_round):
        if sum(w for w, _ in per_round) != 1:
            raise ValueError("weights must sum to 1")
        parts = [(w, _segment_exact(q)) for w, q in per_round]
        stats = tuple(sum(w * st[i] for w, st in parts) for i in range(3))
        value, alive = _combine((Fraction(0), Fraction(0), Fraction(1)), [stats], L, 0)
        return ExactValue(value, alive, L)
    weights = np.array([float(w) for w, _ in per_round])
    if not math.isclose(math.fsum(weights), 1.0, abs_tol=1e-12):
        raise ValueError("weights must sum to 1")
    q = np.array([[float(x) for x in q] for _, q in per_round])
    if np.any(q < 0) or np.any(q > 1):
        raise ValueError("capture probabilities must lie in [0, 1]")
    return evaluate(CaptureProfile(np.zeros(0), (RoundProfile(weights, q),), L))


def expected_capture_time(g: Graph, s: CopSchedule, m: GamblerModel) -> ExactValue:
    return evaluate(capture_probs(g, s, m))


@dataclass(frozen=True)
class EvasionCheck:
    survival: float
    product_bound: float
    exp_bound: float

    @property
    def holds(self) -> bool:
        return self.survival <= self.product_bound + 1e-12 and self.survival < self.exp_bound


def round_evasion_bound_check(m: GamblerModel, s: CopSchedule) -> EvasionCheck:
    """Exact one-round survival against a static gambler and the bound prod (1 - p_v)^2 < e^-2."""
    if not m.is_static:
        raise ValueError("the per-round evasion bound is stated for a static gambler")
    if s.prelude_length:
        raise ValueError("schedule has a prelude; the round survival is not stationary")
    profile = capture_probs(None, s, m)
    (rp,) = profile.rounds
    _, _, a = _segment_float(rp.q)
    survival = float((np.asarray(rp.weights, dtype=np.longdouble) * a).sum())
    p = m.schedule[0]
    product = float(np.prod((1 - p.astype(np.longdouble)) ** 2))
    check = EvasionCheck(survival, product, math.exp(-2))
    assert check.holds, f"round survival {survival} breaks the bound {product} / e^-2"
    return check


def _round_positions(s: CopSchedule, rng: np.random.Generator) -> np.ndarray:
    out = np.empty((s.k, s.round_length), dtype=np.int64)
    for grp in s.groups:
        a = rng.choice(len(grp.weights), p=grp.weights) if len(grp.weights) > 1 else 0
        out[list(grp.cops)] = grp.positions[a]
    return out


def simulate(
    g: Graph,
    s: CopSchedule,
    m: GamblerModel,
    rng: np.random.Generator,
    turn_cap: int = TURN_CAP,
    trace: bool = False,
) -> GameOutcome:
    """Play one game turn by turn until capture."""
    if g.n != m.n:
        raise ValueError("gambler and graph disagree on n")
    log: list[tuple[int, frozenset[int]]] = []
    L0, L = s.prelude_length, s.round_length
    current = None
    for t in range(1, turn_cap + 1):
        if t <= L0:
            cops = s.prelude[:, t - 1]
        else:
            j = (t - L0 - 1) % L
            if j == 0:
                current = _round_positions(s, rng)
            cops = current[:, j]
        v = int(np.searchsorted(m.cdf_at(t), rng.random(), side="right"))
        if trace:
            log.append((v, frozenset(cops.tolist())))
        if v in cops:
            return GameOutcome(t, v, tuple(log) if trace else None)
    raise RuntimeError(f"no capture within {turn_cap} turns")


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


def _run_block(args) -> np.ndarray:
    s, m, size, seed, block, turn_cap = args
    rng = _block_rng(seed, block)
    result = np.zeros(size, dtype=np.int64)
    active = np.arange(size)
    L0, L = s.prelude_length, s.round_length
    choice = [np.zeros(size, dtype=np.int64) for _ in s.groups]
    t = 0
    while active.size:
        t += 1
        if t > turn_cap:
            raise RuntimeError(f"no capture within {turn_cap} turns")
        v = np.searchsorted(m.cdf_at(t), rng.random(active.size), side="right")
        if t <= L0:
            hit = np.isin(v, s.prelude[:, t - 1])
        else:
            j = (t - L0 - 1) % L
            hit = np.zeros(active.size, dtype=bool)
            for gi, grp in enumerate(s.groups):
                if j == 0 and len(grp.weights) > 1:
                    choice[gi] = rng.choice(len(grp.weights), size=active.size, p=grp.weights)
                elif j == 0:
                    choice[gi] = np.zeros(active.size, dtype=np.int64)
                here = grp.positions[choice[gi], :, j]  # (active, cops)
                hit |= (here == v[:, None]).any(axis=1)
        result[active[hit]] = t
        keep = ~hit
        active = active[keep]
        choice = [c[keep] for c in choice]
    return result


def capture_times(
    s: CopSchedule,
    m: GamblerModel,
    trials: int,
    seed: int,
    workers: int = 1,
    turn_cap: int = TURN_CAP,
) -> np.ndarray:
    """Capture turns of ``trials`` independent games.

    Trials are processed in fixed blocks of MC_BLOCK; block b draws from the
    stream ``SeedSequence(seed, spawn_key=(b,))``, so the output does not
    depend on the number of workers or the order blocks finish in.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    jobs = [
        (s, m, min(MC_BLOCK, trials - start), seed, b, turn_cap)
        for b, start in enumerate(range(0, trials, MC_BLOCK))
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_block, jobs))
    else:
        parts = [_run_block(job) for job in jobs]
    return np.concatenate(parts)


def monte_carlo(
    g: Graph,
    s: CopSchedule,
    m: GamblerModel,
    trials: int,
    seed: int,
    workers: int = 1,
    turn_cap: int = TURN_CAP,
) -> CaptureStats:
    if g.n != m.n:
        raise ValueError("gambler and graph disagree on n")
    return CaptureStats.from_samples(capture_times(s, m, trials, seed, workers, turn_cap), seed)
