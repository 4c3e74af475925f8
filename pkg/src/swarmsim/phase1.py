"""Centralized formation planning: place the virtual circle, count usable
triangle centroids per segment, hand out goals, and pick the master agent."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .dynamics import AgentState
from .errors import InsufficientCapacity, NoFreeRegion
from .geometry import CircleRegion, Polygon, TriangleGrid, as_points, points_in_polygon, quadrants, vec2

PROBE_INCREMENT = math.pi / 36


@dataclass(frozen=True, eq=False)
class ObjectFootprint:
    """Payload outline relative to its reference point, which rides the circle center."""

    shape: Polygon

    @property
    def area(self) -> float:
        return self.shape.area

    @property
    def max_diameter(self) -> float:
        return self.shape.diameter

    def placed_at(self, center) -> Polygon:
        return self.shape.translated(center)


@dataclass(frozen=True, eq=False)
class SegmentCensus:
    counts: tuple[int, int, int, int]
    members: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]  # grid row indices, grid order
    points: np.ndarray  # the grid's centroid points, so members can be resolved


@dataclass(frozen=True, eq=False)
class GoalAssignment:
    goals: np.ndarray  # (N, 2)
    polar_offsets: np.ndarray  # (N, 2): r, alpha
    source_segments: np.ndarray  # (N,)
    circle: CircleRegion

    def __len__(self) -> int:
        return len(self.goals)


def probe_deviations(increment: float = PROBE_INCREMENT) -> list[float]:
    """0, +d, -d, +2d, -2d, ... up to pi, without probing pi twice."""
    out = [0.0]
    k = 1
    while k * increment < math.pi - 1e-12:
        out += [k * increment, -k * increment]
        k += 1
    out.append(math.pi)
    return out


def fit_circle(
    cloud,
    swarm_centroid,
    target,
    r_c: float,
    prev_center=None,
    step: float = 0.25,
    clearance: float = 0.0,
) -> CircleRegion:
    """Advance a radius-``r_c`` circle by ``step`` toward ``target``.

    The circle moves from ``prev_center`` (or ``swarm_centroid`` when there is
    none) along the direction closest to the target bearing that leaves no
    cloud point strictly inside radius ``r_c + clearance``.
    """
    pts = as_points(cloud)
    anchor = vec2(prev_center if prev_center is not None else swarm_centroid)
    to_target = vec2(target) - anchor
    bearing = math.atan2(to_target[1], to_target[0])
    limit = r_c + clearance
    for dev in probe_deviations():
        ang = bearing + dev
        center = anchor + step * np.array([math.cos(ang), math.sin(ang)])
        if len(pts) == 0 or not np.any(np.hypot(*(pts - center).T) < limit):
            return CircleRegion(center, r_c)
    raise NoFreeRegion(
        f"no direction from ({anchor[0]:.4g}, {anchor[1]:.4g}) keeps sensed obstacles outside a circle of radius {r_c}"
    )


def census(grid: TriangleGrid, circle: CircleRegion, footprint: ObjectFootprint) -> SegmentCensus:
    """Count centroids lying both inside the placed footprint and in each segment."""
    inside = points_in_polygon(grid.points, footprint.placed_at(circle.center))
    seg = quadrants(grid.points, circle.center)
    members = tuple(np.flatnonzero(inside & (seg == k)) for k in (1, 2, 3, 4))
    return SegmentCensus(counts=tuple(len(m) for m in members), members=members, points=grid.points)


def select_segments(counts) -> tuple[int, int]:
    """The two segments with the most centroids; ties go to the lower index."""
    order = sorted(range(4), key=lambda k: (-counts[k], k))
    return order[0] + 1, order[1] + 1


def polar_offsets(goals, center) -> np.ndarray:
    """``(r, alpha)`` rows: distance and full-quadrant bearing of each goal from ``center``."""
    d = as_points(goals) - vec2(center)
    rows = [(math.hypot(x, y), math.atan2(y, x) if (x or y) else 0.0) for x, y in d]
    return np.array(rows, dtype=float).reshape(-1, 2)


def goals_from_offsets(offsets: np.ndarray, center) -> np.ndarray:
    # scalar trig on purpose: agents rebuild their goals one at a time and must agree bit for bit
    c = vec2(center)
    return np.array([c + r * np.array([math.cos(a), math.sin(a)]) for r, a in offsets]).reshape(-1, 2)


def assign_goals(
    census: SegmentCensus,
    circle: CircleRegion,
    N: int,
    pairing: str = "index",
    positions=None,
) -> GoalAssignment:
    """Hand out farthest-first centroids from the two fullest segments.

    Agents ``1..ceil(N/2)`` draw from the fullest segment, the rest from the
    runner-up; within a segment agent order follows decreasing distance from
    the circle center. ``pairing="nearest"`` keeps the same goal set but
    permutes it to minimize total travel from ``positions``.
    """
    top, second = select_segments(census.counts)
    quotas = {top: math.ceil(N / 2), second: N // 2}
    for seg, need in quotas.items():
        if census.counts[seg - 1] < need:
            raise InsufficientCapacity(
                f"segment S{seg} holds {census.counts[seg - 1]} centroids but {need} agents need goals there; "
                "increase n toward r_c / (3 r_s) or enlarge r_c"
            )

    chosen, segs = [], []
    for seg in (top, second):
        idx = census.members[seg - 1]
        pts = census.points[idx]
        dist = np.hypot(*(pts - circle.center).T)
        # stable sort keeps grid order among equal distances
        order = np.argsort(-dist, kind="stable")[: quotas[seg]]
        chosen.append(pts[order])
        segs += [seg] * quotas[seg]
    goals = np.concatenate(chosen, axis=0) if chosen else np.zeros((0, 2))
    segs = np.array(segs, dtype=int)

    if pairing == "nearest":
        if positions is None:
            raise ValueError("nearest pairing needs agent positions")
        p = as_points(positions)
        cost = np.hypot(*(p[:, None, :] - goals[None, :, :]).transpose(2, 0, 1))
        _, col = linear_sum_assignment(cost)
        goals, segs = goals[col], segs[col]
    elif pairing != "index":
        raise ValueError(f"unknown pairing {pairing!r}")

    offsets = polar_offsets(goals, circle.center)
    # rebuilding from the offsets makes goal == center + r (cos a, sin a) hold exactly
    goals = goals_from_offsets(offsets, circle.center)
    return GoalAssignment(goals=goals, polar_offsets=offsets, source_segments=segs, circle=circle)


def positions_of(agents) -> np.ndarray:
    """Positions from a list of :class:`AgentState` or any ``(N, 2)`` array-like."""
    if len(agents) and isinstance(agents[0], AgentState):
        return np.array([a.position for a in agents])
    return as_points(agents)


def goals_of(assignment) -> np.ndarray:
    return assignment.goals if isinstance(assignment, GoalAssignment) else as_points(assignment)


def formation_converged(agents, assignment, epsilon: float) -> bool:
    """True when every agent is strictly within ``epsilon`` of its goal."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    d = positions_of(agents) - goals_of(assignment)
    return bool(np.all(np.hypot(d[:, 0], d[:, 1]) < epsilon))


def elect_master(N: int, seed: int) -> int:
    """Uniformly drawn 1-based agent index; the same seed always picks the same agent."""
    if N < 1:
        raise ValueError("need at least one agent")
    return random.Random(seed).randint(1, N)
