"""Ring-of-rangefinders sensor model.

Each agent carries ``m`` range sensors spaced ``2 pi / m`` apart. A reading is
the distance along the sensor's ray to the nearest obstacle edge; readings with
no hit inside ``max_range`` are NaN, never ``max_range``, so open space never
produces phantom obstacle points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AgentInObstacle
from .geometry import Polygon, as_points, cross2, points_in_polygon, vec2

DEFAULT_MAX_RANGE = 10.0


@dataclass(frozen=True)
class SensorRig:
    m: int
    max_range: float = DEFAULT_MAX_RANGE

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"sensor count must be a positive integer, got {self.m!r}")
        if not self.max_range > 0:
            raise ValueError("max_range must be positive")

    @property
    def spacing(self) -> float:
        return 2 * np.pi / self.m

    @property
    def angular_offsets(self) -> np.ndarray:
        return np.arange(self.m) * self.spacing

    def ray_angles(self, heading: float) -> np.ndarray:
        return self.angular_offsets + heading


@dataclass(frozen=True, eq=False)
class SensorScan:
    readings: np.ndarray  # NaN where nothing was hit
    timestamp: int = 0

    @property
    def present(self) -> np.ndarray:
        return ~np.isnan(self.readings)


@dataclass(frozen=True, eq=False)
class ObstaclePointCloud:
    points: np.ndarray
    source_agent: int = 0

    def __len__(self) -> int:
        return len(self.points)


def _edge_array(obstacles) -> np.ndarray:
    if not obstacles:
        return np.zeros((0, 2, 2))
    return np.concatenate([poly.edges for poly in obstacles], axis=0)


def cast_rays(origin, angles, edges: np.ndarray, max_range: float) -> np.ndarray:
    """Distance to the nearest edge along each ray, NaN beyond ``max_range``."""
    o = vec2(origin)
    angles = np.asarray(angles, dtype=float)
    out = np.full(angles.shape, np.nan)
    if len(edges) == 0:
        return out
    d = np.stack([np.cos(angles), np.sin(angles)], axis=-1)[:, None, :]
    a = edges[None, :, 0, :]
    e = edges[None, :, 1, :] - a
    w = a - o
    denom = cross2(d, e)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = cross2(w, e) / denom
        s = cross2(w, d) / denom
    hit = (denom != 0) & (t > 0) & (s >= 0) & (s <= 1)
    t = np.where(hit, t, np.inf).min(axis=1)
    keep = t <= max_range
    out[keep] = t[keep]
    return out


def scan(agent_position, agent_heading: float, rig: SensorRig, obstacles: list[Polygon], timestamp: int = 0) -> SensorScan:
    pos = vec2(agent_position)
    for poly in obstacles:
        if points_in_polygon(pos, poly)[0]:
            raise AgentInObstacle(f"agent at ({pos[0]:.6g}, {pos[1]:.6g}) is inside an obstacle")
    readings = cast_rays(pos, rig.ray_angles(agent_heading), _edge_array(obstacles), rig.max_range)
    return SensorScan(readings=readings, timestamp=timestamp)


def predict_obstacle_points(
    scan: SensorScan, agent_position, agent_heading: float, rig: SensorRig, source_agent: int = 0
) -> ObstaclePointCloud:
    """World-frame obstacle location for every present reading."""
    if len(scan.readings) != rig.m:
        raise ValueError(f"scan has {len(scan.readings)} readings but the rig has {rig.m} sensors")
    mask = scan.present
    ang = rig.ray_angles(agent_heading)[mask]
    d = scan.readings[mask]
    pts = vec2(agent_position) + d[:, None] * np.column_stack([np.cos(ang), np.sin(ang)])
    return ObstaclePointCloud(points=pts, source_agent=source_agent)


def aggregate_swarm_cloud(clouds: list[ObstaclePointCloud]) -> np.ndarray:
    """Concatenate per-agent clouds, ordered by agent then by sensor."""
    ordered = sorted(clouds, key=lambda c: c.source_agent)
    if not ordered:
        return np.zeros((0, 2))
    return as_points(np.concatenate([c.points.reshape(-1, 2) for c in ordered], axis=0))
