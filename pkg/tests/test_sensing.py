import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from swarmsim.errors import AgentInObstacle
from swarmsim.geometry import Polygon
from swarmsim.sensing import (
    ObstaclePointCloud,
    SensorRig,
    SensorScan,
    aggregate_swarm_cloud,
    predict_obstacle_points,
    scan,
)


def test_rig_layout():
    rig = SensorRig(8)
    assert rig.spacing == pytest.approx(math.pi / 4)
    np.testing.assert_allclose(rig.ray_angles(0.1), 0.1 + np.arange(8) * math.pi / 4)


@pytest.mark.parametrize("m, rng", [(0, 10.0), (2.5, 10.0), (4, 0.0)])
def test_rig_validation(m, rng):
    with pytest.raises(ValueError):
        SensorRig(m, rng)


def test_wall_ahead_reading_is_exact():
    wall = Polygon.rectangle(3.0, -5.0, 4.0, 5.0)
    s = scan((0.0, 0.0), 0.0, SensorRig(4, 10.0), [wall])
    assert s.readings[0] == 3.0
    assert np.isnan(s.readings[1:]).all()


def test_diagonal_rays_match_analytic_distance():
    # box around the agent; ray at angle a hits x = 2 at distance 2 / cos(a)
    box = [Polygon.rectangle(2, -10, 3, 10), Polygon.rectangle(-3, -10, -2, 10),
           Polygon.rectangle(-10, 2, 10, 3), Polygon.rectangle(-10, -3, 10, -2)]
    rig = SensorRig(8, 10.0)
    s = scan((0.0, 0.0), 0.3, rig, box)
    for ang, d in zip(rig.ray_angles(0.3), s.readings):
        c, sn = abs(math.cos(ang)), abs(math.sin(ang))
        expected = min(2 / c if c > 1e-12 else math.inf, 2 / sn if sn > 1e-12 else math.inf)
        assert d == pytest.approx(expected, rel=1e-12)


def test_hits_beyond_range_are_absent_not_clipped():
    wall = Polygon.rectangle(12.0, -5.0, 13.0, 5.0)
    s = scan((0.0, 0.0), 0.0, SensorRig(8, 10.0), [wall])
    assert s.present.sum() == 0
    assert len(predict_obstacle_points(s, (0, 0), 0.0, SensorRig(8, 10.0))) == 0


def test_empty_environment_gives_no_points():
    rig = SensorRig(8)
    s = scan((1.0, 2.0), 0.7, rig, [])
    assert len(predict_obstacle_points(s, (1.0, 2.0), 0.7, rig)) == 0


def test_agent_inside_obstacle():
    with pytest.raises(AgentInObstacle):
        scan((0.5, 0.5), 0.0, SensorRig(8), [Polygon.rectangle(0, 0, 1, 1)])


def test_scan_length_mismatch():
    with pytest.raises(ValueError):
        predict_obstacle_points(SensorScan(np.array([1.0, 2.0])), (0, 0), 0.0, SensorRig(8))


@given(st.floats(-4, 4), st.floats(-4, 4), st.floats(-math.pi, math.pi), st.integers(3, 24))
def test_predicted_points_lie_on_obstacle_boundary(x, y, heading, m):
    poly = Polygon.regular(6, 2.0, 0.2).translated((8.0, 1.0))
    rig = SensorRig(m, 20.0)
    s = scan((x, y), heading, rig, [poly])
    cloud = predict_obstacle_points(s, (x, y), heading, rig, source_agent=3)
    assert cloud.source_agent == 3
    for p in cloud.points:
        e = poly.edges
        a, b = e[:, 0], e[:, 1]
        t = np.clip(np.einsum("ij,ij->i", p - a, b - a) / np.einsum("ij,ij->i", b - a, b - a), 0, 1)
        dist = np.hypot(*(a + t[:, None] * (b - a) - p).T).min()
        assert dist < 1e-9


def test_aggregate_orders_by_agent():
    c2 = ObstaclePointCloud(np.array([[2.0, 2.0]]), source_agent=2)
    c1 = ObstaclePointCloud(np.array([[1.0, 1.0], [1.5, 1.5]]), source_agent=1)
    c3 = ObstaclePointCloud(np.zeros((0, 2)), source_agent=3)
    np.testing.assert_array_equal(aggregate_swarm_cloud([c2, c3, c1]), [[1, 1], [1.5, 1.5], [2, 2]])
    assert aggregate_swarm_cloud([]).shape == (0, 2)
