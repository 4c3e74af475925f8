"""Decentralized transport.

The master agent fits the next circle from the swarm's pooled scans and
broadcasts only its center. Each agent rebuilds its own goal from the polar
offset it stored at assignment time, so the whole goal set translates rigidly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import CircleRegion, vec2
from .phase1 import fit_circle


@dataclass(frozen=True)
class PolarOffset:
    r: float
    alpha: float

    def __post_init__(self):
        if not self.r >= 0:
            raise ValueError("offset distance must be non-negative")


@dataclass(frozen=True, eq=False)
class PlanMessage:
    new_center: np.ndarray
    epoch: int

    def __post_init__(self):
        object.__setattr__(self, "new_center", vec2(self.new_center))

    def to_payload(self) -> dict:
        return {"epoch": self.epoch, "x": float(self.new_center[0]), "y": float(self.new_center[1])}

    @classmethod
    def from_payload(cls, payload: dict) -> PlanMessage:
        return cls(new_center=(payload["x"], payload["y"]), epoch=int(payload["epoch"]))


@dataclass(frozen=True)
class Arrived:
    """The current circle is within one step of the target."""

    epoch: int


def compute_offset(goal, center) -> PolarOffset:
    d = vec2(goal) - vec2(center)
    r = math.hypot(d[0], d[1])
    if r == 0:
        return PolarOffset(0.0, 0.0)
    return PolarOffset(r, math.atan2(d[1], d[0]))


def next_goal(offset: PolarOffset, plan: PlanMessage) -> np.ndarray:
    return plan.new_center + offset.r * np.array([math.cos(offset.alpha), math.sin(offset.alpha)])


def plan_step(
    aggregate_cloud,
    current: CircleRegion,
    target,
    step: float,
    r_c: float,
    epoch: int = 0,
    clearance: float = 0.0,
) -> PlanMessage | Arrived:
    """Master-side planning: either signal arrival or fit the next circle.

    ``epoch`` is the epoch of the last issued plan; a new plan carries ``epoch + 1``.
    """
    target = vec2(target)
    if math.dist(current.center, target) <= step:
        return Arrived(epoch)
    circle = fit_circle(
        aggregate_cloud, current.center, target, r_c, prev_center=current.center, step=step, clearance=clearance
    )
    return PlanMessage(new_center=circle.center, epoch=epoch + 1)


@dataclass
class GoalTracker:
    """Agent-side protocol state: the stored offset and the last applied epoch."""

    offset: PolarOffset
    goal: np.ndarray
    last_epoch: int = 0
    discarded: list[int] = field(default_factory=list)

    def receive(self, plan: PlanMessage) -> bool:
        """Apply ``plan`` unless it is stale; returns whether it was applied."""
        if plan.epoch <= self.last_epoch:
            self.discarded.append(plan.epoch)
            return False
        self.goal = next_goal(self.offset, plan)
        self.last_epoch = plan.epoch
        return True
