import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import best_k_subset_mass
from pursuit import gamblers as gm
from pursuit.graph import diameter, generate, spanning_tree
from pursuit.sectors import Sector, SectorDecomposition, decompose
from pursuit.strategies import (
    CopSchedule,
    ScheduleError,
    changing_two_part,
    diameter_chase,
    dfs_patrol,
    occupied_sets,
    part_length,
    sit,
    top_k_sit,
    walk_then_sit,
)


def manual_star_decomposition():
    """Star on 5 vertices split as {0,1,2,3} and {0,4} sharing the centre."""
    star = generate("star", 5)
    tree = spanning_tree(star, 0)
    sectors = (
        Sector(frozenset({0, 1, 2, 3}), 0, tree.induced({0, 1, 2, 3}, 0)),
        Sector(frozenset({0, 4}), 0, tree.induced({0, 4}, 0)),
    )
    return star, SectorDecomposition(5, 2, sectors, (0, 1))


def capture_rate(s: CopSchedule, p) -> list[float]:
    return [sum(p[v] for v in occ) for occ in occupied_sets(s, 0)]


def test_top_k_sit_examples():
    s = top_k_sit(np.array([0.5, 0.3, 0.2]), 2)
    assert occupied_sets(s, 0) == [frozenset({0, 1})]
    assert capture_rate(s, [0.5, 0.3, 0.2]) == pytest.approx([0.8])
    u = top_k_sit(gm.uniform(10), 2)
    assert s.round_length == 1 and u.initial_positions == (0, 1)
    assert capture_rate(u, [0.1] * 10) == pytest.approx([0.2])
    full = top_k_sit(gm.uniform(3), 5)
    assert occupied_sets(full, 0) == [frozenset({0, 1, 2})]


def test_top_k_sit_rejects_changing():
    with pytest.raises(ScheduleError):
        top_k_sit(gm.make_changing([[1, 0], [0, 1]]), 1)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 10**6))
def test_top_k_sit_is_best_subset(n, k, seed):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(n)) if seed % 2 else np.round(rng.dirichlet(np.ones(n)), 1) + 0.0
    p = p / p.sum()
    (occ,) = occupied_sets(top_k_sit(p, k), 0)
    assert sum(p[v] for v in occ) == pytest.approx(best_k_subset_mass(p, k), abs=1e-12)


def test_occupied_sets_dedups():
    assert occupied_sets(sit([3, 3]), 0) == [frozenset({3})]


def test_dfs_patrol_single_sector_path():
    g = generate("path", 3)
    s = dfs_patrol(decompose(g, 1), g)
    assert s.round_length == 6
    assert [sorted(o) for o in occupied_sets(s, 0)] == [[0], [1], [2], [2], [1], [0]]
    # the tour of a path rooted at an end is a palindrome, so both orientations coincide
    for i in range(s.n_alternatives):
        assert [next(iter(o)) for o in occupied_sets(s, i)] in ([0, 1, 2, 2, 1, 0],)


def test_dfs_patrol_star_padding():
    star, dec = manual_star_decomposition()
    s = dfs_patrol(dec, star)
    s.validate(star)
    assert s.round_length == 10  # 2*4 - 1 + 3 leaves
    second = s.groups[1].positions
    # [0, 4, 4, 0] reads the same both ways, so its orientations merge
    assert second.shape == (1, 1, 10)
    assert second[0, 0].tolist() == [0, 4, 4, 0] + [0] * 6
    first = s.groups[0].positions
    assert first[0, 0].tolist() == [0, 1, 1, 0, 2, 2, 0, 3, 3, 0]
    assert first[1, 0].tolist() == first[0, 0].tolist()[::-1]
    assert s.n_alternatives == 2


def test_dfs_patrol_two_vertex_path():
    g = generate("path", 2)
    s = dfs_patrol(decompose(g, 1), g)
    assert s.round_length <= 4
    (row,) = s.alternative(0)[1]
    assert all(row.tolist().count(v) >= 2 for v in (0, 1))


def test_dfs_patrol_weights_and_initial_positions():
    g = generate("random_tree", 40, seed=4)
    dec = decompose(g, 4)
    s = dfs_patrol(dec, g)
    assert sum(s.alternative(i)[0] for i in range(s.n_alternatives)) == pytest.approx(1.0)
    assert s.initial_positions == tuple(dec.sectors[dec.assignment[c]].shared for c in range(4))


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from(["random_tree", "connected_gnp", "grid", "cycle", "star", "path"]),
    st.integers(3, 60),
    st.integers(0, 10**6),
    st.data(),
)
def test_dfs_patrol_invariants(kind, n, seed, data):
    g = generate(kind, n, seed=seed, p=0.08)
    k = data.draw(st.integers(1, min(n - 1, 6)))
    dec = decompose(g, k)
    s = dfs_patrol(dec, g)
    s.validate(g)
    assert s.round_length <= 3 * max(sec.size for sec in dec.sectors) - 2 or s.round_length == 2
    for i in range(s.n_alternatives):
        _, pos = s.alternative(i)
        covered = set()
        for si, sec in enumerate(dec.sectors):
            rows = pos[list(dec.cops_of(si))]
            assert (rows == rows[0]).all()
            seq = rows[0].tolist()
            assert all(seq.count(v) >= 2 for v in sec.vertices)
            covered |= set(seq)
        assert covered == set(range(n))


def test_part_length():
    assert part_length(10, 3) == 8  # ceil(23/3)
    assert part_length(30, 3) == 21
    assert part_length(10, 1) == 21


def test_two_part_uniform_star_conflict():
    star, dec = manual_star_decomposition()
    s = changing_two_part(dec, gm.uniform(5), star)
    s.validate(star)
    Q = part_length(5, 2)
    assert s.round_length == 2 * Q
    _, pos = s.alternative(0)
    # every score ties, sector 0 takes the centre and sector 1 falls back to leaf 4
    assert pos[0, Q:].tolist() == [0] * Q
    assert pos[1, Q:].tolist() == [4] * Q


def test_two_part_point_mass():
    g = generate("random_tree", 30, seed=8)
    dec = decompose(g, 3)
    w = 17
    s = changing_two_part(dec, gm.point_mass(30, w), g)
    s.validate(g)
    Q = part_length(30, 3)
    owner = next(c for c in range(3) if w in dec.sectors[dec.assignment[c]].vertices)
    row = s.prelude[owner]
    first_arrival = row.tolist().index(w)
    assert first_arrival < Q
    assert (row[first_arrival:] == w).all()


def test_two_part_alternating_gambler():
    g = generate("path", 2)
    dec = decompose(g, 1)
    m = gm.make_changing([[1, 0], [0, 1]])
    s = changing_two_part(dec, m, g)
    Q = part_length(2, 1)
    # part-two turns Q+1..2Q hold three even turns and two odd ones, so vertex 1 wins
    assert s.prelude[0, Q:].tolist() == [1] * Q
    assert s.alternative(0)[1][0, Q:].tolist() == [1] * Q


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from(["random_tree", "connected_gnp", "grid", "star", "double_star"]),
    st.integers(4, 40),
    st.integers(1, 5),
    st.integers(0, 10**6),
    st.data(),
)
def test_two_part_invariants(kind, n, period, seed, data):
    g = generate(kind, n, seed=seed, p=0.1)
    k = data.draw(st.integers(1, min(n - 1, 5)))
    dec = decompose(g, k)
    m = gm.random_schedule(n, period, np.random.default_rng(seed))
    s = changing_two_part(dec, m, g)
    s.validate(g)
    Q = part_length(n, k)
    full = np.concatenate([s.prelude, s.alternative(0)[1]], axis=1)
    for r in range(full.shape[1] // (2 * Q)):
        part2 = full[:, r * 2 * Q + Q : (r + 1) * 2 * Q]
        assert (part2 == part2[:, :1]).all()
        targets = {}
        for c in range(k):
            sec = dec.assignment[c]
            assert part2[c, 0] in dec.sectors[sec].vertices
            targets[sec] = part2[c, 0]
        distinct_possible = all(sec.size > 1 for sec in dec.sectors)
        if distinct_possible:
            assert len(set(targets.values())) == len(targets)


def round_final_columns(s, d):
    """(turn, column-in-full-timeline) of every round's last turn."""
    total = s.prelude_length + s.round_length
    return [1 + d * (i + 1) for i in range((total - 1) // d)]


@pytest.mark.parametrize("kind,n,k", [("star", 9, 2), ("double_star", 14, 3), ("grid", 12, 2), ("cycle", 9, 4)])
@pytest.mark.parametrize("period", [1, 2, 5])
def test_diameter_chase_final_turn_targets(kind, n, k, period):
    g = generate(kind, n)
    d = diameter(g)
    m = gm.random_schedule(n, period, np.random.default_rng(n + period))
    s = diameter_chase(g, m, k)
    s.validate(g)
    full = np.concatenate([s.prelude, s.alternative(0)[1]], axis=1)
    for turn in [1] + round_final_columns(s, d):
        p = m.distribution_at(turn)
        order = np.lexsort((np.arange(n), -p))
        assert set(full[:, turn - 1].tolist()) == set(order[:k].tolist())


def test_diameter_chase_star_peak_on_leaf():
    p = np.full(7, 0.1)
    p[5] = 0.4
    g = generate("star", 7)
    s = diameter_chase(g, gm.make_static(p), 1)
    full = np.concatenate([s.prelude, s.alternative(0)[1]], axis=1)
    assert full[0, 0] == 5 and all(full[0, t - 1] == 5 for t in range(3, full.shape[1] + 1, 2))


def test_diameter_chase_uniform_final_turn_rate():
    g = generate("grid", 16)
    k = 3
    s = diameter_chase(g, gm.uniform(16), k)
    full = np.concatenate([s.prelude, s.alternative(0)[1]], axis=1)
    for turn in round_final_columns(s, diameter(g)):
        assert len(set(full[:, turn - 1].tolist())) / 16 == pytest.approx(k / 16)


def test_walk_then_sit():
    g = generate("path", 6)
    s = walk_then_sit(g, [0], [5])
    s.validate(g)
    assert s.prelude[0].tolist() == [0, 1, 2, 3, 4, 5]
    assert occupied_sets(s, 0) == [frozenset({5})]


def test_validate_catches_jumps():
    g = generate("path", 4)
    bad = sit([0])
    object.__setattr__(bad, "prelude", np.array([[3]]))
    with pytest.raises(ScheduleError):
        bad.validate(g)


def test_schedule_json_shape():
    g = generate("star", 9)
    s = dfs_patrol(decompose(g, 3), g)
    data = s.to_dict()
    assert data["round_length"] == s.round_length
    assert len(data["groups"]) == len(s.groups)
    assert data["initial_positions"] == [0, 0, 0]
