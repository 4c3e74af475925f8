"""Scenario files.

A scenario is a YAML document with exactly these top-level sections::

    agents:       positions, sensors, max_range, radius
    environment:  target, obstacles
    object:       footprint (polygon | rectangle | regular)
    control:      gains, region and grid sizes, planning cadence, seed, limits
    output:       name, directory, plots

Lengths are world units, angles radians, times seconds. Unknown keys are
rejected with the line and column of the offending key.
"""

from __future__ import annotations

from pathlib import Path

import yaml

from .dynamics import AS_WRITTEN, SQUARED, DynamicsParams
from .engine import Scenario, validate_scenario
from .errors import InvalidPolygon, ScenarioError
from .geometry import Polygon
from .phase1 import ObjectFootprint

PLOT_KINDS = ("trajectories", "formation-error", "distance", "regions")

_SCHEMA = {
    "agents": {"positions", "count", "sensors", "max_range", "radius"},
    "environment": {"target", "obstacles"},
    "object": {"footprint"},
    "control": {
        "k_c", "k_r", "r_s", "dt", "repulsion", "r_c", "n", "epsilon", "step", "cadence",
        "clearance", "obstacle_memory", "message_delay", "pairing", "max_time", "seed",
    },
    "output": {"name", "directory", "plots"},
}
_REQUIRED = {"agents": {"positions"}, "environment": {"target"}, "object": {"footprint"}}


def _marks(text: str) -> dict[tuple, tuple[int, int]]:
    """1-based (line, column) of every mapping key and sequence item, keyed by path."""
    out: dict[tuple, tuple[int, int]] = {}

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                p = path + (k.value,)
                out[p] = (k.start_mark.line + 1, k.start_mark.column + 1)
                walk(v, p)
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                p = path + (i,)
                out[p] = (v.start_mark.line + 1, v.start_mark.column + 1)
                walk(v, p)

    root = yaml.compose(text, Loader=yaml.SafeLoader)
    if root is not None:
        walk(root, ())
    return out


class _Reader:
    def __init__(self, text: str):
        try:
            self.data = yaml.safe_load(text)
            self.marks = _marks(text)
        except yaml.MarkedYAMLError as exc:
            mark = exc.problem_mark or exc.context_mark
            line, col = (mark.line + 1, mark.column + 1) if mark else (None, None)
            raise ScenarioError(f"YAML syntax error: {exc.problem}", line, col) from None
        except yaml.YAMLError as exc:
            raise ScenarioError(f"YAML error: {exc}") from None
        if not isinstance(self.data, dict):
            raise ScenarioError("scenario must be a mapping with sections " + ", ".join(_SCHEMA))

    def fail(self, path: tuple, message: str):
        while path and path not in self.marks:
            path = path[:-1]
        line, col = self.marks.get(path, (None, None))
        where = ".".join(str(p) for p in path)
        raise ScenarioError(f"{where}: {message}" if where else message, line, col)

    def check_keys(self):
        for key in self.data:
            if key not in _SCHEMA:
                self.fail((key,), f"unknown section {key!r} (expected one of {', '.join(_SCHEMA)})")
        for section, allowed in _SCHEMA.items():
            body = self.data.setdefault(section, {})
            if body is None:
                body = self.data[section] = {}
            if not isinstance(body, dict):
                self.fail((section,), "must be a mapping")
            for key in body:
                if key not in allowed:
                    self.fail((section, key), f"unknown key {key!r}")
            for key in _REQUIRED.get(section, ()):
                if key not in body:
                    self.fail((section,), f"missing required key {key!r}")

    def get(self, section: str, key: str, default=None):
        return self.data[section].get(key, default)

    def number(self, section: str, key: str, default, kind=float):
        value = self.get(section, key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail((section, key), f"expected a number, got {value!r}")
        if kind is int:
            if int(value) != value:
                self.fail((section, key), f"expected an integer, got {value!r}")
            return int(value)
        return float(value)

    def point(self, path: tuple, value):
        if (
            not isinstance(value, (list, tuple))
            or len(value) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
        ):
            self.fail(path, f"expected a point [x, y], got {value!r}")
        return [float(value[0]), float(value[1])]

    def polygon(self, path: tuple, shape) -> Polygon:
        try:
            if isinstance(shape, dict) and len(shape) == 1:
                (kind, body), = shape.items()
                if kind == "polygon":
                    return Polygon([self.point(path + (kind, i), v) for i, v in enumerate(body)])
                if kind == "rectangle":
                    if not isinstance(body, list) or len(body) != 4:
                        self.fail(path + (kind,), "rectangle is [xmin, ymin, xmax, ymax]")
                    return Polygon.rectangle(*(float(v) for v in body))
                if kind == "regular":
                    if not isinstance(body, dict) or set(body) - {"sides", "radius", "phase"}:
                        self.fail(path + (kind,), "regular takes sides, radius and optional phase")
                    return Polygon.regular(int(body["sides"]), float(body["radius"]), float(body.get("phase", 0.0)))
            self.fail(path, "expected one of {polygon: [...]}, {rectangle: [...]}, {regular: {...}}")
        except ScenarioError:
            raise
        except InvalidPolygon as exc:
            self.fail(path, str(exc))
        except (KeyError, TypeError, ValueError) as exc:
            self.fail(path, f"malformed shape ({exc})")


def parse_scenario(text: str, name: str = "scenario") -> Scenario:
    """Build a :class:`Scenario` without checking its load-time invariants."""
    r = _Reader(text)
    r.check_keys()

    positions = r.get("agents", "positions")
    if not isinstance(positions, list) or not positions:
        r.fail(("agents", "positions"), "expected a non-empty list of [x, y] points")
    positions = [r.point(("agents", "positions", i), p) for i, p in enumerate(positions)]
    count = r.get("agents", "count")
    if count is not None and count != len(positions):
        r.fail(("agents", "count"), f"count is {count} but {len(positions)} positions are listed")

    obstacles = r.get("environment", "obstacles", []) or []
    if not isinstance(obstacles, list):
        r.fail(("environment", "obstacles"), "expected a list of shapes")
    obstacles = [r.polygon(("environment", "obstacles", i), o) for i, o in enumerate(obstacles)]

    mode = r.get("control", "repulsion", AS_WRITTEN)
    if mode not in (AS_WRITTEN, SQUARED):
        r.fail(("control", "repulsion"), f"expected {AS_WRITTEN!r} or {SQUARED!r}")
    pairing = r.get("control", "pairing", "index")
    if pairing not in ("index", "nearest"):
        r.fail(("control", "pairing"), "expected 'index' or 'nearest'")
    try:
        params = DynamicsParams(
            k_c=r.number("control", "k_c", 5.0),
            k_r=r.number("control", "k_r", 2.5),
            r_s=r.number("control", "r_s", 0.0575),
            dt=r.number("control", "dt", 0.01),
            repulsion_exponent_mode=mode,
        )
    except ValueError as exc:
        r.fail(("control",), str(exc))

    plots = r.get("output", "plots", []) or []
    if not isinstance(plots, list) or any(p not in PLOT_KINDS for p in plots):
        r.fail(("output", "plots"), f"plots must be a list drawn from {', '.join(PLOT_KINDS)}")

    return Scenario(
        initial_positions=positions,
        target=r.point(("environment", "target"), r.get("environment", "target")),
        footprint=ObjectFootprint(r.polygon(("object", "footprint"), r.get("object", "footprint"))),
        obstacles=obstacles,
        params=params,
        r_c=r.number("control", "r_c", 8.5),
        n=r.number("control", "n", 49, int),
        m=r.number("agents", "sensors", 8, int),
        max_range=r.number("agents", "max_range", 10.0),
        agent_radius=r.number("agents", "radius", 0.0),
        epsilon=r.number("control", "epsilon", 0.05),
        step=r.number("control", "step", 0.25),
        cadence=r.number("control", "cadence", 10, int),
        clearance=r.number("control", "clearance", 0.0),
        obstacle_memory=r.number("control", "obstacle_memory", 0.0),
        message_delay=r.number("control", "message_delay", 0, int),
        pairing=pairing,
        max_time=r.number("control", "max_time", 1000.0),
        seed=r.number("control", "seed", 0, int),
        name=str(r.get("output", "name", name)),
        output_directory=r.get("output", "directory"),
        plots=tuple(plots),
    )


def read_scenario(path) -> Scenario:
    """Parse a scenario file (structure only; see :func:`load_scenario`)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    return parse_scenario(text, name=path.stem)


def load_scenario(path) -> Scenario:
    """Parse a scenario file and reject it if any load-time invariant fails."""
    s = read_scenario(path)
    validate_scenario(s)
    return s
