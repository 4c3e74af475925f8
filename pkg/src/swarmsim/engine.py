"""Scenario model, the two-phase tick loop, metrics and the in-memory trace."""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import dynamics
from .dynamics import AgentState, DynamicsParams
from .errors import (
    AgentInObstacle,
    CoincidenceWarning,
    InsufficientCapacity,
    IntegrationDiverged,
    NoFreeRegion,
    RegionTooSmall,
    ScenarioError,
    SwarmSimError,
)
from .geometry import CircleRegion, Polygon, as_points, max_grid_resolution, pack_triangles, points_in_polygon, vec2
from .phase1 import (
    ObjectFootprint,
    assign_goals,
    census,
    elect_master,
    fit_circle,
    formation_converged,
    goals_of,
    positions_of,
)
from .phase2 import Arrived, GoalTracker, PlanMessage, PolarOffset, plan_step
from .sensing import SensorRig, aggregate_swarm_cloud, predict_obstacle_points, scan

PHASE_ASSEMBLY = "1"
PHASE_TRANSPORT = "2"
PHASE_DONE = "done"

OUTCOME_ARRIVED = "arrived"
OUTCOME_TICK_LIMIT = "tick-limit"

# engine error -> trace outcome label
ERROR_OUTCOMES = {
    NoFreeRegion: "no-free-region",
    InsufficientCapacity: "insufficient-capacity",
    IntegrationDiverged: "integration-diverged",
    AgentInObstacle: "agent-in-obstacle",
}


@dataclass(eq=False)
class Scenario:
    initial_positions: np.ndarray
    target: np.ndarray
    footprint: ObjectFootprint
    obstacles: list[Polygon] = field(default_factory=list)
    params: DynamicsParams = field(default_factory=DynamicsParams)
    r_c: float = 8.5
    n: int = 49
    m: int = 8
    max_range: float = 10.0
    epsilon: float = 0.05
    step: float = 0.25
    cadence: int = 10
    clearance: float = 0.0
    obstacle_memory: float = 0.0
    message_delay: int = 0
    pairing: str = "index"
    agent_radius: float = 0.0
    max_time: float = 1000.0
    seed: int = 0
    name: str = "scenario"
    output_directory: str | None = None
    plots: tuple[str, ...] = ()

    def __post_init__(self):
        self.initial_positions = as_points(self.initial_positions)
        self.target = vec2(self.target)

    @property
    def N(self) -> int:
        return len(self.initial_positions)

    @property
    def max_ticks(self) -> int:
        return int(round(self.max_time / self.params.dt))


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


def scenario_checks(s: Scenario) -> list[Check]:
    """Load-time invariants, each reported separately."""
    checks = []
    try:
        bound = max_grid_resolution(s.r_c, s.params.r_s)
        checks.append(Check(f"grid resolution bound: n ≤ {bound}", s.n <= bound, f"n = {s.n}, r_c / (3 r_s) = {s.r_c / (3 * s.params.r_s):.4f}"))
    except (RegionTooSmall, ValueError) as exc:
        checks.append(Check("grid resolution bound: n ≤ r_c / (3 r_s)", False, str(exc)))

    diam = s.footprint.max_diameter
    checks.append(Check(f"object fits the region: diameter ≤ 2 r_c = {2 * s.r_c:g}", diam <= 2 * s.r_c * (1 + 1e-9), f"object diameter = {diam:.4f}"))

    bad = [
        i + 1
        for i, p in enumerate(s.initial_positions)
        if any(points_in_polygon(p, poly)[0] for poly in s.obstacles)
    ]
    checks.append(Check("initial positions outside obstacles", not bad, f"agents inside obstacles: {bad}" if bad else ""))

    checks.append(Check("at least one agent", s.N >= 1, f"N = {s.N}"))
    checks.append(Check("positive tolerances", s.epsilon > 0 and s.step > 0 and s.cadence >= 1 and s.r_c > 0, ""))
    checks.append(Check("non-negative message delay", s.message_delay >= 0, f"delay = {s.message_delay}"))
    return checks


def validate_scenario(s: Scenario) -> None:
    failed = [c for c in scenario_checks(s) if not c.passed]
    if failed:
        raise ScenarioError("; ".join(f"{c.name} failed ({c.detail})" if c.detail else f"{c.name} failed" for c in failed))


def formation_error(agents, assignment) -> float:
    """Mean distance from each agent to its assigned goal."""
    d = positions_of(agents) - goals_of(assignment)
    return float(np.mean(np.hypot(d[:, 0], d[:, 1])))


def support_coverage(agents, footprint: ObjectFootprint, circle: CircleRegion) -> bool:
    """True if every agent stands under the object placed at ``circle.center``."""
    return bool(np.all(points_in_polygon(positions_of(agents), footprint.placed_at(circle.center))))


@dataclass(frozen=True)
class Event:
    tick: int
    kind: str
    payload: dict


@dataclass(eq=False)
class SimTrace:
    N: int
    dt: float
    ticks: list[int] = field(default_factory=list)
    phases: list[str] = field(default_factory=list)
    positions: list[np.ndarray] = field(default_factory=list)
    goals: list[np.ndarray] = field(default_factory=list)
    centers: list[np.ndarray] = field(default_factory=list)
    errors: list[float] = field(default_factory=list)
    distances: list[np.ndarray] = field(default_factory=list)
    coverage: list[bool | None] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)
    outcome: str | None = None

    def __len__(self) -> int:
        return len(self.ticks)

    def record(self, tick, phase, positions, goals, center, error, distances, coverage):
        self.ticks.append(tick)
        self.phases.append(phase)
        self.positions.append(np.array(positions, dtype=float))
        self.goals.append(np.array(goals, dtype=float))
        self.centers.append(np.array(center, dtype=float) if center is not None else np.full(2, np.nan))
        self.errors.append(float(error))
        self.distances.append(np.array(distances, dtype=float))
        self.coverage.append(coverage)

    def log(self, tick: int, kind: str, **payload) -> Event:
        ev = Event(tick, kind, payload)
        self.events.append(ev)
        return ev

    def events_of(self, kind: str) -> list[Event]:
        return [e for e in self.events if e.kind == kind]

    @property
    def sim_times(self) -> np.ndarray:
        return np.asarray(self.ticks, dtype=float) * self.dt

    def array(self, name: str) -> np.ndarray:
        return np.array(getattr(self, name))

    @property
    def load_tick(self) -> int | None:
        ev = self.events_of("load")
        return ev[0].tick if ev else None

    @property
    def error(self) -> str | None:
        ev = self.events_of("error")
        return ev[-1].payload.get("message") if ev else None

    def phase_durations(self) -> tuple[float | None, float | None]:
        """Simulated seconds spent assembling and transporting (None if never reached)."""
        load = self.load_tick
        if load is None:
            return None, None
        p1 = load * self.dt
        if self.phases and self.phases[-1] == PHASE_DONE:
            return p1, (self.ticks[-1] - load) * self.dt
        return p1, None

    def summary(self) -> dict:
        p1, p2 = self.phase_durations()
        return {
            "outcome": self.outcome,
            "total_ticks": self.ticks[-1] if self.ticks else 0,
            "phase1_seconds": p1,
            "phase2_seconds": p2,
            "final_formation_error": self.errors[-1] if self.errors else None,
            "distance_traveled": [float(d) for d in self.distances[-1]] if self.distances else [],
            "plans": len(self.events_of("plan")),
            "master": (self.events_of("election") or [Event(0, "", {"master": None})])[0].payload["master"],
            "coverage_violations": sum(1 for c in self.coverage if c is False),
            "goal_frame_coverage_violations": next(
                (e.payload["goal_frame_coverage_violations"] for e in self.events_of("diagnostics")), None
            ),
            "min_separation": _min_separation(self.positions),
        }


def _min_separation(positions: list[np.ndarray]) -> float | None:
    if not positions or len(positions[0]) < 2:
        return None
    best = math.inf
    for p in positions:
        diff = p[:, None, :] - p[None, :, :]
        d = np.hypot(diff[..., 0], diff[..., 1])
        np.fill_diagonal(d, np.inf)
        best = min(best, float(d.min()))
    return best


def _swarm_cloud(agents: list[AgentState], rig: SensorRig, obstacles: list[Polygon], tick: int) -> np.ndarray:
    clouds = []
    for a in agents:
        sc = scan(a.position, a.heading, rig, obstacles, timestamp=tick)
        clouds.append(predict_obstacle_points(sc, a.position, a.heading, rig, source_agent=a.index))
    return aggregate_swarm_cloud(clouds)


def _with_goals(agents: list[AgentState], goals) -> list[AgentState]:
    return [AgentState(a.index, a.position, g, a.heading, a.distance_traveled) for a, g in zip(agents, goals)]


class _Run:
    """Mutable state of one simulation; :func:`run` is the public entry point."""

    def __init__(self, s: Scenario, tick_limit: int | None):
        self.s = s
        self.tick_limit = tick_limit if tick_limit is not None else s.max_ticks
        self.rig = SensorRig(s.m, s.max_range)
        self.trace = SimTrace(N=s.N, dt=s.params.dt)
        self.agents = [AgentState(i + 1, p, p) for i, p in enumerate(s.initial_positions)]
        self.tick = 0
        self.phase = PHASE_ASSEMBLY
        self.circle: CircleRegion | None = None
        self.assignment = None
        self.trackers: list[GoalTracker] = []
        self.inbox: deque[tuple[int, PlanMessage]] = deque()
        self.epoch = 0
        self.final_epoch: int | None = None
        self.load_tick: int | None = None
        self.applied_center: np.ndarray | None = None
        self.goal_frame_violations = 0
        self.memory = np.zeros((0, 2))

    def run(self) -> SimTrace:
        s, tr = self.s, self.trace
        tr.log(
            0,
            "scenario",
            name=s.name,
            N=s.N,
            dt=s.params.dt,
            r_c=s.r_c,
            n=s.n,
            epsilon=s.epsilon,
            target=s.target.tolist(),
            obstacles=[poly.vertices.tolist() for poly in s.obstacles],
            footprint=s.footprint.shape.vertices.tolist(),
        )
        try:
            self._plan_formation()
            self._loop()
        except SwarmSimError as exc:
            label = next((v for k, v in ERROR_OUTCOMES.items() if isinstance(exc, k)), "error")
            tr.outcome = label
            tr.log(self.tick, "error", reason=label, message=str(exc))
            if len(tr) == 0 or tr.ticks[-1] != self.tick:
                self._record()
        return tr

    def _plan_formation(self):
        s = self.s
        cloud = _swarm_cloud(self.agents, self.rig, s.obstacles, self.tick)
        centroid = s.initial_positions.mean(axis=0)
        self.circle = fit_circle(cloud, centroid, s.target, s.r_c, None, s.step, s.clearance)
        self.trace.log(self.tick, "circle", x=float(self.circle.center[0]), y=float(self.circle.center[1]), r=s.r_c)
        grid = pack_triangles(self.circle, s.n)
        cen = census(grid, self.circle, s.footprint)
        self.trace.log(self.tick, "census", counts=list(cen.counts))
        self.assignment = assign_goals(cen, self.circle, s.N, pairing=s.pairing, positions=s.initial_positions)
        self.trace.log(
            self.tick,
            "assignment",
            goals=self.assignment.goals.tolist(),
            segments=self.assignment.source_segments.tolist(),
        )
        self.agents = _with_goals(self.agents, self.assignment.goals)

    def _start_transport(self):
        s = self.s
        self.load_tick = self.tick
        self.trace.log(self.tick, "load", x=float(self.circle.center[0]), y=float(self.circle.center[1]))
        master = elect_master(s.N, s.seed)
        self.trace.log(self.tick, "election", master=master, seed=s.seed)
        self.trackers = [
            GoalTracker(PolarOffset(float(r), float(a)), goal=g.copy())
            for (r, a), g in zip(self.assignment.polar_offsets, self.assignment.goals)
        ]
        self.applied_center = self.circle.center.copy()
        self.phase = PHASE_TRANSPORT

    def _master_cloud(self) -> np.ndarray:
        """This tick's pooled scans, plus remembered points when the master keeps a map."""
        s = self.s
        cloud = _swarm_cloud(self.agents, self.rig, s.obstacles, self.tick)
        if s.obstacle_memory <= 0:
            return cloud
        pts = np.concatenate([self.memory, cloud])
        near = np.hypot(*(pts - self.circle.center).T) <= s.obstacle_memory
        self.memory = np.unique(pts[near], axis=0)
        return self.memory

    def _plan_transport(self):
        s = self.s
        cloud = self._master_cloud()
        result = plan_step(cloud, self.circle, s.target, s.step, s.r_c, self.epoch, s.clearance)
        if isinstance(result, Arrived):
            msg = PlanMessage(s.target, self.epoch + 1)
            self.final_epoch = msg.epoch
            self.trace.log(self.tick, "arrived", epoch=msg.epoch)
        else:
            msg = result
        self.epoch = msg.epoch
        self.circle = CircleRegion(msg.new_center, s.r_c)
        self.trace.log(self.tick, "plan", **msg.to_payload())
        self.inbox.append((self.tick + s.message_delay, msg))

    def _deliver(self):
        changed = False
        while self.inbox and self.inbox[0][0] <= self.tick:
            _, msg = self.inbox.popleft()
            applied = [tr.receive(msg) for tr in self.trackers]
            if any(applied):
                self.applied_center = msg.new_center
                changed = True
        if changed:
            self.agents = _with_goals(self.agents, [t.goal for t in self.trackers])

    def _current_goals(self) -> np.ndarray:
        return np.array([a.current_goal for a in self.agents])

    def object_circle(self) -> CircleRegion:
        """Where the payload actually sits: the applied circle shifted by the
        formation's mean tracking lag, since the object rides on the agents."""
        goals = self._current_goals()
        pos = positions_of(self.agents)
        return CircleRegion(self.applied_center + pos.mean(axis=0) - goals.mean(axis=0), self.s.r_c)

    def _record(self):
        s = self.s
        goals = self._current_goals()
        cov = None
        if self.phase != PHASE_ASSEMBLY and self.applied_center is not None:
            cov = support_coverage(self.agents, s.footprint, self.object_circle())
            if not support_coverage(self.agents, s.footprint, self.circle):
                self.goal_frame_violations += 1
        self.trace.record(
            self.tick,
            self.phase,
            [a.position for a in self.agents],
            goals,
            self.circle.center if self.circle is not None else None,
            formation_error(self.agents, goals),
            [a.distance_traveled for a in self.agents],
            cov,
        )

    def _check_obstacles(self):
        if not self.s.obstacles:
            return
        pos = positions_of(self.agents)
        for poly in self.s.obstacles:
            hit = np.flatnonzero(points_in_polygon(pos, poly))
            if len(hit):
                p = pos[hit[0]]
                raise AgentInObstacle(f"agent {hit[0] + 1} entered an obstacle at ({p[0]:.4g}, {p[1]:.4g})")

    def _loop(self):
        s, tr = self.s, self.trace
        while True:
            if self.phase == PHASE_ASSEMBLY and formation_converged(self.agents, self._current_goals(), s.epsilon):
                self._start_transport()
            if self.phase == PHASE_TRANSPORT:
                if self.final_epoch is None and (self.tick - self.load_tick) % s.cadence == 0:
                    self._plan_transport()
                self._deliver()
                if (
                    self.final_epoch is not None
                    and all(t.last_epoch == self.final_epoch for t in self.trackers)
                    and formation_converged(self.agents, self._current_goals(), s.epsilon)
                ):
                    self.phase = PHASE_DONE
            self._record()
            if self.phase != PHASE_ASSEMBLY and (self.phase == PHASE_DONE or self.tick >= self.tick_limit):
                tr.log(self.tick, "diagnostics", goal_frame_coverage_violations=self.goal_frame_violations)
            if self.phase == PHASE_DONE:
                tr.outcome = OUTCOME_ARRIVED
                tr.log(self.tick, "done")
                return
            if self.tick >= self.tick_limit:
                tr.outcome = OUTCOME_TICK_LIMIT
                tr.log(self.tick, "tick-limit", limit=self.tick_limit)
                return
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", CoincidenceWarning)
                self.agents = dynamics.step(self.agents, s.params, tick=self.tick)
            for w in caught:
                if issubclass(w.category, CoincidenceWarning):
                    tr.log(self.tick, "warning", message=str(w.message))
            self.tick += 1
            self._check_obstacles()


def run(scenario: Scenario, tick_limit: int | None = None) -> SimTrace:
    """Simulate assembly then transport; errors end the run with a partial trace.

    The returned trace's ``outcome`` is ``"arrived"``, ``"tick-limit"`` or one
    of the labels in :data:`ERROR_OUTCOMES`.
    """
    validate_scenario(scenario)
    if tick_limit is not None and tick_limit <= 0:
        raise ValueError("tick_limit must be positive")
    return _Run(scenario, tick_limit).run()
