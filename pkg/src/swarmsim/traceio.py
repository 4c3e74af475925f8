"""Reading and writing traces.

The per-tick trace is CSV with one header row. Events go to a sibling file
with the ``.events`` suffix, one ``tick,kind,payload`` row each, payload as
compact JSON. Floats are written with ``repr`` so a trace read back from disk
is bit-identical to the one in memory.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .engine import OUTCOME_ARRIVED, OUTCOME_TICK_LIMIT, Event, SimTrace
from .errors import EmptyTrace


def trace_columns(N: int) -> list[str]:
    cols = ["tick", "sim_time", "phase"]
    cols += [f"p{i}_{c}" for i in range(1, N + 1) for c in "xy"]
    cols += [f"goal{i}_{c}" for i in range(1, N + 1) for c in "xy"]
    cols += ["center_x", "center_y", "formation_error"]
    cols += [f"distance_traveled{i}" for i in range(1, N + 1)]
    cols += ["support_coverage"]
    return cols


def events_path(trace_path) -> Path:
    return Path(trace_path).with_suffix(".events")


def _f(x: float) -> str:
    return "" if np.isnan(x) else repr(float(x))


def write_trace(trace: SimTrace, path) -> tuple[Path, Path]:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trace_columns(trace.N))
        for k in range(len(trace)):
            cov = trace.coverage[k]
            row = [str(trace.ticks[k]), repr(trace.ticks[k] * trace.dt), trace.phases[k]]
            row += [_f(v) for v in trace.positions[k].ravel()]
            row += [_f(v) for v in trace.goals[k].ravel()]
            row += [_f(v) for v in trace.centers[k]]
            row += [_f(trace.errors[k])]
            row += [_f(v) for v in trace.distances[k]]
            row += ["" if cov is None else str(int(cov))]
            w.writerow(row)

    epath = events_path(path)
    with epath.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tick", "kind", "payload"])
        for ev in trace.events:
            w.writerow([ev.tick, ev.kind, json.dumps(ev.payload, sort_keys=True, separators=(",", ":"))])
    return path, epath


def _outcome(events: list[Event]) -> str | None:
    for ev in reversed(events):
        if ev.kind == "done":
            return OUTCOME_ARRIVED
        if ev.kind == "tick-limit":
            return OUTCOME_TICK_LIMIT
        if ev.kind == "error":
            return ev.payload.get("reason")
    return None


def read_events(path) -> list[Event]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return [Event(int(t), kind, json.loads(payload)) for t, kind, payload in rows[1:]]


def read_trace(path) -> SimTrace:
    """Load a trace and, when present, its ``.events`` file."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise EmptyTrace(f"{path} has no tick rows")
    header = rows[0]
    N = sum(1 for c in header if c.startswith("p") and c.endswith("_x"))
    if header != trace_columns(N):
        raise ValueError(f"{path} does not have a trace header")

    epath = events_path(path)
    events = read_events(epath) if epath.exists() else []
    dt = None
    for ev in events:
        if ev.kind == "scenario":
            dt = ev.payload["dt"]
    if dt is None:
        # recover dt from the first nonzero tick
        t1 = next((r for r in rows[1:] if int(r[0]) > 0), None)
        dt = float(t1[1]) / int(t1[0]) if t1 else 0.0

    def fl(cells):
        return np.array([float(c) if c != "" else np.nan for c in cells])

    trace = SimTrace(N=N, dt=dt, events=events, outcome=_outcome(events))
    pos_at, goal_at, cen_at = 3, 3 + 2 * N, 3 + 4 * N
    for r in rows[1:]:
        cov = r[-1]
        trace.record(
            int(r[0]),
            r[2],
            fl(r[pos_at:goal_at]).reshape(N, 2),
            fl(r[goal_at:cen_at]).reshape(N, 2),
            fl(r[cen_at:cen_at + 2]),
            float(r[cen_at + 2]),
            fl(r[cen_at + 3:cen_at + 3 + N]),
            None if cov == "" else cov == "1",
        )
    return trace
