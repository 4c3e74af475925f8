import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import chisquare

from swarmsim.dynamics import AgentState
from swarmsim.errors import InsufficientCapacity, NoFreeRegion
from swarmsim.geometry import CircleRegion, Polygon, pack_triangles, point_in_polygon, quadrant_of, quadrants
from swarmsim.phase1 import (
    ObjectFootprint,
    SegmentCensus,
    assign_goals,
    census,
    elect_master,
    fit_circle,
    formation_converged,
    goals_from_offsets,
    polar_offsets,
    probe_deviations,
    select_segments,
)

TRAY = ObjectFootprint(Polygon.regular(16, 6.0))


def oracle_fit(cloud, anchor, target, r_c, step, clearance=0.0):
    """Brute force: try every probe direction in order, keep the first clear one."""
    incr = math.pi / 36
    devs = [0.0]
    for k in range(1, 36):
        devs += [k * incr, -k * incr]
    devs.append(math.pi)
    bearing = math.atan2(target[1] - anchor[1], target[0] - anchor[0])
    for d in devs:
        c = (anchor[0] + step * math.cos(bearing + d), anchor[1] + step * math.sin(bearing + d))
        if all(math.dist(c, p) >= r_c + clearance for p in cloud):
            return c
    return None


# -- circle fitting -----------------------------------------------------------


def test_probe_directions():
    devs = probe_deviations()
    assert len(devs) == 72 == len(set(devs))
    assert devs[:5] == [0.0, math.pi / 36, -math.pi / 36, 2 * math.pi / 36, -2 * math.pi / 36]
    assert devs[-1] == math.pi


def test_open_field_steps_straight_at_target():
    c = fit_circle(np.zeros((0, 2)), (0, 0), (3, 4), 8.5, step=0.25)
    np.testing.assert_allclose(c.center, (0.15, 0.2), atol=1e-15)
    assert c.radius == 8.5


def test_prev_center_overrides_centroid():
    c = fit_circle([], (100, 100), (10, 0), 1.0, prev_center=(0, 0), step=1.0)
    np.testing.assert_allclose(c.center, (1, 0))


def test_wall_ahead_deflects_by_forty_degrees():
    wall = np.column_stack([np.full(401, 8.7), np.linspace(-20, 20, 401)])
    c = fit_circle(wall, (0, 0), (100, 0), 8.5, step=0.25)
    ang = math.atan2(c.center[1], c.center[0])
    assert ang == pytest.approx(8 * math.pi / 36)


def test_clearance_widens_the_keepout():
    wall = np.column_stack([np.full(401, 9.0), np.linspace(-20, 20, 401)])
    straight = fit_circle(wall, (0, 0), (100, 0), 8.5, step=0.25)
    assert straight.center[1] == 0
    deflected = fit_circle(wall, (0, 0), (100, 0), 8.5, step=0.25, clearance=0.5)
    assert deflected.center[1] != 0


def test_surrounded_raises():
    ang = np.linspace(0, 2 * math.pi, 200, endpoint=False)
    ring = 5 * np.column_stack([np.cos(ang), np.sin(ang)])
    with pytest.raises(NoFreeRegion):
        fit_circle(ring, (0, 0), (50, 0), 8.5)


@given(
    st.lists(st.tuples(st.floats(-15, 15), st.floats(-15, 15)), max_size=25),
    st.tuples(st.floats(-50, 50), st.floats(-50, 50)),
    st.floats(0.5, 9),
)
def test_fit_matches_brute_force(cloud, target, r_c):
    if math.dist(target, (0, 0)) < 1e-6:
        return
    expected = oracle_fit(cloud, (0.0, 0.0), target, r_c, 0.25)
    if expected is None:
        with pytest.raises(NoFreeRegion):
            fit_circle(cloud, (0, 0), target, r_c)
    else:
        np.testing.assert_allclose(fit_circle(cloud, (0, 0), target, r_c).center, expected, atol=1e-12)


# -- census and selection -----------------------------------------------------


@pytest.mark.parametrize("n", [1, 4, 13, 49])
def test_census_matches_pointwise_oracle(n):
    circle = CircleRegion((2.0, -3.0), 8.5)
    grid = pack_triangles(circle, n)
    shape = Polygon([(-5, -2), (6, -4), (4, 5), (-3, 6)])
    cen = census(grid, circle, ObjectFootprint(shape))
    placed = shape.translated(circle.center)
    expected = Counter(
        quadrant_of(p, circle.center) for p in grid.points if point_in_polygon(p, placed)
    )
    assert cen.counts == tuple(expected[k] for k in (1, 2, 3, 4))
    for k, idx in enumerate(cen.members, start=1):
        assert all(quadrant_of(grid.points[i], circle.center) == k for i in idx)


@pytest.mark.parametrize(
    "counts, expected",
    [((5, 9, 9, 1), (2, 3)), ((4, 4, 4, 4), (1, 2)), ((0, 0, 3, 7), (4, 3)), ((1, 0, 0, 0), (1, 2))],
)
def test_select_segments(counts, expected):
    assert select_segments(counts) == expected


# -- goal assignment ----------------------------------------------------------


def _assignment(N, n=49, pairing="index", positions=None):
    circle = CircleRegion((10.0, 20.0), 8.5)
    cen = census(pack_triangles(circle, n), circle, TRAY)
    return cen, assign_goals(cen, circle, N, pairing=pairing, positions=positions)


@pytest.mark.parametrize("N", [1, 2, 5, 10, 11])
def test_quotas_and_distinct_goals(N):
    cen, a = _assignment(N)
    top, second = select_segments(cen.counts)
    segs = list(a.source_segments)
    assert segs == [top] * math.ceil(N / 2) + [second] * (N // 2)
    assert len({tuple(g) for g in a.goals}) == N


def test_goals_are_farthest_first_within_segment():
    _, a = _assignment(10)
    d = np.hypot(*(a.goals - a.circle.center).T)
    for seg in set(a.source_segments):
        ds = d[a.source_segments == seg]
        assert np.all(np.diff(ds) <= 1e-12)


def test_goals_are_inside_footprint_and_segment():
    _, a = _assignment(10)
    placed = TRAY.placed_at(a.circle.center)
    for g, seg in zip(a.goals, a.source_segments):
        assert point_in_polygon(g, placed)
        assert quadrant_of(g, a.circle.center) == seg


def test_offsets_reconstruct_goals_exactly():
    _, a = _assignment(10)
    np.testing.assert_array_equal(goals_from_offsets(a.polar_offsets, a.circle.center), a.goals)
    np.testing.assert_array_equal(polar_offsets(a.goals, a.circle.center)[:, 0], np.hypot(*(a.goals - a.circle.center).T))


def test_zero_offset_has_zero_angle():
    assert polar_offsets([(1.0, 2.0)], (1.0, 2.0)).tolist() == [[0.0, 0.0]]


def test_insufficient_capacity():
    with pytest.raises(InsufficientCapacity, match="increase n"):
        _assignment(10, n=2)


def test_nearest_pairing_is_a_cheaper_permutation():
    rng = np.random.default_rng(5)
    pos = rng.uniform(0, 30, (10, 2))
    _, by_index = _assignment(10)
    _, nearest = _assignment(10, pairing="nearest", positions=pos)
    key = lambda g: sorted(map(tuple, np.round(g, 12)))
    assert key(by_index.goals) == key(nearest.goals)
    cost = lambda g: np.hypot(*(pos - g).T).sum()
    assert cost(nearest.goals) <= cost(by_index.goals) + 1e-9


def test_nearest_pairing_needs_positions():
    with pytest.raises(ValueError):
        _assignment(4, pairing="nearest")


# -- convergence and election -------------------------------------------------


def test_formation_converged_is_strict():
    goals = np.array([[0.0, 0.0], [1.0, 0.0]])
    assert formation_converged(goals + 0.01, goals, 0.05)
    assert not formation_converged(goals + [[0.05, 0.0], [0, 0]], goals, 0.05)
    agents = [AgentState(i, g, g) for i, g in enumerate(goals, start=1)]
    assert formation_converged(agents, goals, 1e-9)
    with pytest.raises(ValueError):
        formation_converged(goals, goals, 0.0)


def test_election_is_seeded_and_in_range():
    assert elect_master(10, 42) == elect_master(10, 42)
    assert elect_master(1, 123) == 1
    assert all(1 <= elect_master(7, s) <= 7 for s in range(200))
    with pytest.raises(ValueError):
        elect_master(0, 1)


def test_election_is_uniform_over_seeds():
    counts = Counter(elect_master(10, s) for s in range(20000))
    assert sorted(counts) == list(range(1, 11))
    assert chisquare([counts[k] for k in range(1, 11)]).pvalue > 1e-3


def test_diagonal_target_half_step():
    c = fit_circle([], (0, 0), (100, 100), 8.5, step=0.5)
    np.testing.assert_allclose(c.center, (0.5 / math.sqrt(2), 0.5 / math.sqrt(2)), atol=1e-15)


def test_wall_through_the_swarm_leaves_no_region():
    wall = np.column_stack([np.ones(401), np.linspace(-20, 20, 401)])
    with pytest.raises(NoFreeRegion):
        fit_circle(wall, (0, 0), (100, 0), 8.5, step=0.5)


def test_distant_single_point_is_admissible():
    c = fit_circle([(0.6, 0.5 / math.sqrt(2))], (0, 0), (100, 100), 0.1, step=0.5)
    np.testing.assert_allclose(c.center, (0.3536, 0.3536), atol=1e-4)


def _hand_census(per_segment):
    """Census over explicit points: ``per_segment[k]`` lists distances along the S(k+1) diagonal."""
    pts, members = [], []
    for k, dists in enumerate(per_segment):
        ang = math.pi / 4 + k * math.pi / 2
        members.append(np.arange(len(pts), len(pts) + len(dists)))
        pts += [(d * math.cos(ang), d * math.sin(ang)) for d in dists]
    return SegmentCensus(tuple(len(d) for d in per_segment), tuple(members), np.array(pts).reshape(-1, 2))


def test_two_agents_take_the_farthest_of_opposite_segments():
    cen = _hand_census([[2.0, 1.5, 1.0], [], [2.2, 0.9, 0.5], []])
    a = assign_goals(cen, CircleRegion((0, 0), 8.5), 2)
    np.testing.assert_allclose(np.hypot(*a.goals.T), [2.0, 2.2])
    assert list(a.source_segments) == [1, 3]


def test_four_agents_split_between_the_top_two():
    cen = _hand_census([[1, 2, 3, 4, 5], [1, 2, 3, 4, 5], [1, 2], [1]])
    a = assign_goals(cen, CircleRegion((0, 0), 8.5), 4)
    assert list(a.source_segments) == [1, 1, 2, 2]
    np.testing.assert_allclose(np.hypot(*a.goals.T), [5, 4, 5, 4])


def test_segments_split_the_disc_evenly():
    rng = np.random.default_rng(0)
    r = np.sqrt(rng.uniform(0, 1, 10_000))
    t = rng.uniform(0, 2 * math.pi, 10_000)
    seg = quadrants(np.column_stack([r * np.cos(t), r * np.sin(t)]), (0, 0))
    counts = np.bincount(seg, minlength=5)[1:]
    assert counts.sum() == 10_000
    assert chisquare(counts).pvalue > 1e-3
