"""Goal attraction with short-range inter-agent repulsion, integrated with an
explicit first-order step."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import CoincidenceWarning, IntegrationDiverged
from .geometry import vec2

AS_WRITTEN = "as-written"
SQUARED = "squared"


@dataclass(frozen=True)
class DynamicsParams:
    k_c: float = 5.0
    k_r: float = 2.5
    r_s: float = 0.0575
    dt: float = 0.01
    repulsion_exponent_mode: str = AS_WRITTEN

    def __post_init__(self):
        if not self.k_c > 0:
            raise ValueError("k_c must be positive")
        if not self.k_r >= 0:
            raise ValueError("k_r must be non-negative")
        if not self.r_s > 0:
            raise ValueError("r_s must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.repulsion_exponent_mode not in (AS_WRITTEN, SQUARED):
            raise ValueError(f"unknown repulsion exponent mode {self.repulsion_exponent_mode!r}")


@dataclass(frozen=True, eq=False)
class AgentState:
    index: int
    position: np.ndarray
    current_goal: np.ndarray
    heading: float = 0.0
    distance_traveled: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", vec2(self.position))
        object.__setattr__(self, "current_goal", vec2(self.current_goal))


def velocities(positions: np.ndarray, goals: np.ndarray, params: DynamicsParams) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Velocity of every agent plus the (i, j) pairs, i < j, found at identical positions."""
    pos = np.asarray(positions, dtype=float)
    v = -params.k_c * (pos - np.asarray(goals, dtype=float))
    coincident: list[tuple[int, int]] = []
    if len(pos) > 1 and params.k_r != 0:
        diff = pos[:, None, :] - pos[None, :, :]
        dist = np.hypot(diff[..., 0], diff[..., 1])
        arg = dist if params.repulsion_exponent_mode == AS_WRITTEN else dist**2
        weight = np.exp(-arg / params.r_s**2)
        np.fill_diagonal(weight, 0.0)
        v = v + params.k_r * np.einsum("ij,ijk->ik", weight, diff)
        ii, jj = np.nonzero(np.triu(dist == 0, k=1))
        coincident = list(zip(ii.tolist(), jj.tolist()))
    return v, coincident


def velocity(agent: AgentState, others: list[AgentState], params: DynamicsParams) -> np.ndarray:
    """Velocity of ``agent`` given every other agent (``agent`` itself is skipped if present)."""
    others = [o for o in others if o is not agent]
    pos = np.array([agent.position] + [o.position for o in others])
    goals = np.array([agent.current_goal] + [o.current_goal for o in others])
    v, coincident = velocities(pos, goals, params)
    if any(i == 0 for i, _ in coincident):
        warnings.warn(f"agent {agent.index} coincides with another agent", CoincidenceWarning, stacklevel=2)
    return v[0]


def step(agents: list[AgentState], params: DynamicsParams, tick: int | None = None) -> list[AgentState]:
    """Advance every agent one ``dt`` from the same pre-step snapshot."""
    if not agents:
        return []
    pos = np.array([a.position for a in agents])
    goals = np.array([a.current_goal for a in agents])
    # overflow is reported below as divergence, not as a numpy warning
    with np.errstate(over="ignore", invalid="ignore"):
        v, coincident = velocities(pos, goals, params)
    if not np.all(np.isfinite(v)):
        raise IntegrationDiverged(f"non-finite velocity at tick {tick}", tick=tick)
    for i, j in coincident:
        warnings.warn(
            f"agents {agents[i].index} and {agents[j].index} coincide at tick {tick}", CoincidenceWarning, stacklevel=2
        )
    new_pos = pos + params.dt * v
    out = []
    for a, p_old, p_new in zip(agents, pos, new_pos):
        moved = math.hypot(p_new[0] - p_old[0], p_new[1] - p_old[1])
        out.append(replace(a, position=p_new, distance_traveled=a.distance_traveled + moved))
    return out
