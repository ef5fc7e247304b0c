from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import absorbing_chain_expected, series_expected, turn_by_turn_expected
from pursuit import gamblers as gm
from pursuit.engine import (
    Degenerate,
    NeverCaptured,
    capture_probs,
    capture_times,
    evaluate,
    exact_expected_time,
    expected_capture_time,
    monte_carlo,
    round_evasion_bound_check,
    simulate,
)
from pursuit.graph import generate
from pursuit.sectors import decompose
from pursuit.strategies import changing_two_part, dfs_patrol, diameter_chase, sit, top_k_sit, walk_then_sit


def test_exact_geometric():
    assert exact_expected_time([(1.0, [0.2])]).expected == pytest.approx(5.0, abs=1e-14)


def test_exact_constant_two_turn_round():
    case = [(1.0, [0.25, 0.25])]
    assert series_expected(case) == pytest.approx(4.0, abs=1e-10)
    assert exact_expected_time(case).expected == pytest.approx(4.0, abs=1e-13)


def test_exact_two_alternatives_against_series():
    case = [(0.5, [0.1, 0.0, 0.3, 0.05]), (0.5, [0.0, 0.4, 0.0, 0.2])]
    want = series_expected(case)
    assert exact_expected_time(case).expected == pytest.approx(want, abs=1e-10)
    assert absorbing_chain_expected(case) == pytest.approx(want, abs=1e-9)


def test_exact_fractions():
    val = exact_expected_time([(Fraction(1), [Fraction(1, 3), Fraction(1, 3)])])
    assert val.expected == Fraction(3)
    mixed = exact_expected_time([(Fraction(1, 2), [Fraction(1, 2), Fraction(0)]), (Fraction(1, 2), [Fraction(0), Fraction(1)])])
    assert isinstance(mixed.expected, Fraction)
    assert float(mixed.expected) == pytest.approx(series_expected([(0.5, [0.5, 0.0]), (0.5, [0.0, 1.0])]), abs=1e-12)


def test_exact_errors():
    with pytest.raises(NeverCaptured):
        exact_expected_time([(1.0, [0.0, 0.0])])
    with pytest.raises(Degenerate):
        exact_expected_time([(1.0, [1e-17])])
    with pytest.raises(ValueError):
        exact_expected_time([(0.5, [0.1]), (0.5, [0.1, 0.2])])
    with pytest.raises(ValueError):
        exact_expected_time([(1.0, [1.2])])


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 4), st.integers(1, 8), st.integers(0, 10**6))
def test_renewal_identity(alts, length, seed):
    rng = np.random.default_rng(seed)
    w = rng.dirichlet(np.ones(alts))
    q = rng.random((alts, length)) * rng.choice([0.0, 0.3, 1.0], size=(alts, length), p=[0.3, 0.4, 0.3])
    q[:, -1] = np.maximum(q[:, -1], 0.05)
    case = [(float(w[i]), q[i].tolist()) for i in range(alts)]
    got = exact_expected_time(case).expected
    assert got == pytest.approx(series_expected(case), abs=1e-10, rel=1e-12)
    assert got == pytest.approx(absorbing_chain_expected(case), rel=1e-9)


def test_capture_probs_sitting():
    g = generate("path", 3)
    m = gm.make_static([0.5, 0.3, 0.2])
    prof = capture_probs(g, top_k_sit(m, 2), m)
    assert prof.rounds[0].q.tolist() == [[pytest.approx(0.8)]]


def test_capture_probs_dfs_uniform():
    g = generate("path", 3)
    m = gm.uniform(3)
    prof = capture_probs(g, dfs_patrol(decompose(g, 1), g), m)
    np.testing.assert_allclose(prof.rounds[0].q, 1 / 3)


def test_capture_probs_changing_vs_sitter():
    g = generate("path", 2)
    m = gm.make_changing([[1, 0], [0, 1]])
    prof = capture_probs(g, sit([0]), m)
    assert len(prof.rounds) == 2
    assert prof.rounds[0].q.tolist() == [[1.0]] and prof.rounds[1].q.tolist() == [[0.0]]
    assert evaluate(prof).expected == 1.0


def test_capture_probs_dedups_shared_vertex():
    g = generate("star", 5)
    m = gm.uniform(5)
    prof = capture_probs(g, sit([0, 0, 1]), m)
    assert prof.rounds[0].q[0, 0] == pytest.approx(0.4)


def test_evasion_check_examples():
    g = generate("path", 3)
    s = dfs_patrol(decompose(g, 1), g)
    chk = round_evasion_bound_check(gm.uniform(3), s)
    assert chk.survival == pytest.approx((2 / 3) ** 6, abs=1e-15)
    assert chk.survival <= chk.product_bound + 1e-12 and chk.exp_bound == pytest.approx(np.exp(-2))
    assert round_evasion_bound_check(gm.point_mass(3, 2), s).survival == 0.0
    with pytest.raises(ValueError):
        round_evasion_bound_check(gm.make_changing([[1, 0, 0], [0, 1, 0]]), s)


def test_simulate_examples():
    g = generate("path", 2)
    rng = np.random.default_rng(0)
    assert simulate(g, sit([0]), gm.point_mass(2, 0), rng).capture_turn == 1
    with pytest.raises(RuntimeError, match="no capture"):
        simulate(g, sit([0]), gm.point_mass(2, 1), rng, turn_cap=1000)
    out = simulate(g, sit([0]), gm.uniform(2), rng, trace=True)
    assert out.vertex == 0 and out.trace[-1][0] == 0
    assert all(v not in occ for v, occ in out.trace[:-1])


def test_simulate_geometric_mean():
    g = generate("path", 2)
    times = [simulate(g, sit([0]), gm.uniform(2), np.random.default_rng(i)).capture_turn for i in range(4000)]
    # mean 2, sd sqrt(2)
    assert abs(np.mean(times) - 2.0) < 4 * np.sqrt(2) / np.sqrt(4000)


def test_monte_carlo_examples():
    g = generate("path", 3)
    stats = monte_carlo(g, sit([1]), gm.point_mass(3, 1), 500, seed=1)
    assert stats.mean == 1.0 and stats.sd == 0.0 and stats.half_width == 0.0
    g10 = generate("cycle", 10)
    u = gm.uniform(10)
    s = top_k_sit(u, 2)
    a = monte_carlo(g10, s, u, 10**5, seed=9)
    assert abs(a.mean - 5.0) <= 3 * a.half_width
    assert a == monte_carlo(g10, s, u, 10**5, seed=9)
    assert a.half_width == pytest.approx(1.96 * a.sd / np.sqrt(10**5))


def test_monte_carlo_worker_independent():
    g = generate("grid", 16)
    s = dfs_patrol(decompose(g, 2), g)
    m = gm.uniform(16)
    one = capture_times(s, m, 10000, seed=4, workers=1)
    two = capture_times(s, m, 10000, seed=4, workers=2)
    assert np.array_equal(one, two)


def test_monte_carlo_turn_cap():
    g = generate("path", 2)
    with pytest.raises(RuntimeError):
        monte_carlo(g, sit([0]), gm.point_mass(2, 1), 10, seed=0, turn_cap=50)


def test_path_walk_capture_turn():
    for n in (2, 5, 17):
        g = generate("path", n)
        s = walk_then_sit(g, [0], [n - 1])
        m = gm.point_mass(n, n - 1)
        assert expected_capture_time(g, s, m).expected == n
        assert simulate(g, s, m, np.random.default_rng(0)).capture_turn == n


@pytest.mark.parametrize("period", [1, 2, 3, 7])
@pytest.mark.parametrize("kind", ["grid", "random_tree", "double_star"])
def test_deterministic_strategies_against_turn_sum(kind, period):
    g = generate(kind, 20, seed=5)
    m = gm.random_schedule(20, period, np.random.default_rng(period))
    for s in (changing_two_part(decompose(g, 3), m, g), diameter_chase(g, m, 3)):
        assert expected_capture_time(g, s, m).expected == pytest.approx(turn_by_turn_expected(s, m), rel=1e-10)


@pytest.mark.parametrize("seed", range(6))
def test_monte_carlo_agrees_with_exact(seed):
    rng = np.random.default_rng(seed)
    kind = ["grid", "random_tree", "star", "connected_gnp", "cycle", "path"][seed]
    g = generate(kind, 24, seed=seed, p=0.1)
    k = int(rng.integers(1, 5))
    static = gm.adversarial_suite(g, k, seed)[seed % 6]
    changing = gm.random_schedule(24, 3, rng)
    cases = [
        (dfs_patrol(decompose(g, k), g), static),
        (top_k_sit(static, k), static),
        (changing_two_part(decompose(g, k), changing, g), changing),
        (diameter_chase(g, changing, k), changing),
    ]
    for s, m in cases:
        exact = expected_capture_time(g, s, m).expected
        stats = monte_carlo(g, s, m, 20000, seed=seed)
        assert abs(stats.mean - exact) <= 3 * stats.half_width + 1e-12, (s.name, m.name)
