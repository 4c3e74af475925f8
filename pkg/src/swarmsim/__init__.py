"""Deterministic 2D simulator of a robot swarm that assembles under a payload
and carries it, as a rigid formation, to a target through sensed obstacles."""

from .engine import Scenario, SimTrace, run, validate_scenario
from .errors import (
    AgentInObstacle,
    EmptyTrace,
    InsufficientCapacity,
    IntegrationDiverged,
    NoFreeRegion,
    ScenarioError,
    SwarmSimError,
)
from .scenario import load_scenario, parse_scenario

__all__ = [
    "AgentInObstacle",
    "EmptyTrace",
    "InsufficientCapacity",
    "IntegrationDiverged",
    "NoFreeRegion",
    "Scenario",
    "ScenarioError",
    "SimTrace",
    "SwarmSimError",
    "load_scenario",
    "parse_scenario",
    "run",
    "validate_scenario",
]
