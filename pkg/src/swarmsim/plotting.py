"""Static SVG figures rendered from a trace.

Every figure is a pure function of the trace: fixed canvas, fixed SVG hash
salt and no embedded date, so equal traces give byte-identical files.
Artists that tests need to count carry an SVG ``id`` (``agent-<i>``,
``region-epoch-<k>``).
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.collections import LineCollection
from matplotlib.figure import Figure
from matplotlib.patches import Circle
from matplotlib.patches import Polygon as PolygonPatch

from .engine import SimTrace
from .errors import EmptyTrace
from .geometry import CircleRegion, inscribe_square, pack_triangles

FIGSIZE = (6.4, 4.8)
STYLE = {
    "svg.hashsalt": "swarmsim",
    "svg.fonttype": "path",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.0,
}


def _scenario(trace: SimTrace) -> dict:
    for ev in trace.events:
        if ev.kind == "scenario":
            return ev.payload
    return {}


def _save(fig: Figure, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def _colors(N: int):
    cmap = matplotlib.colormaps["tab10"]
    return [cmap(i % 10) for i in range(N)]


def plot_trajectories(trace: SimTrace, path) -> Path:
    meta = _scenario(trace)
    pos = trace.array("positions")
    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=FIGSIZE)
        ax = fig.add_subplot()
        for k, verts in enumerate(meta.get("obstacles", [])):
            ax.add_patch(PolygonPatch(verts, closed=True, facecolor="0.55", edgecolor="0.3", gid=f"obstacle-{k + 1}"))

        circles = [ev for ev in trace.events if ev.kind == "circle"]
        for ev in circles:
            ax.add_patch(Circle((ev.payload["x"], ev.payload["y"]), ev.payload["r"], fill=False, ec="tab:blue", lw=0.8, gid="region-assembly"))
        r_c = meta.get("r_c", circles[0].payload["r"] if circles else 1.0)
        for ev in trace.events_of("plan"):
            ax.add_patch(
                Circle((ev.payload["x"], ev.payload["y"]), r_c, fill=False, ec="tab:blue", lw=0.3, alpha=0.25, gid=f"region-epoch-{ev.payload['epoch']}")
            )

        for i, c in enumerate(_colors(trace.N)):
            xy = pos[:, i, :]
            (line,) = ax.plot(xy[:, 0], xy[:, 1], color=c, marker="." if len(xy) == 1 else None, label=f"agent {i + 1}")
            line.set_gid(f"agent-{i + 1}")
            ax.plot(xy[0, 0], xy[0, 1], "*", color=c, ms=6)

        master = next((ev.payload["master"] for ev in trace.events if ev.kind == "election"), None)
        if master is not None:
            ax.plot(pos[-1, master - 1, 0], pos[-1, master - 1, 1], "*", color="cyan", mec="k", ms=10, gid="master")
        if "target" in meta:
            ax.plot(*meta["target"], "X", color="tab:red", ms=9, gid="target")

        ax.set_aspect("equal", adjustable="datalim")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.set_title("Agent trajectories and virtual regions")
        ax.autoscale_view()
        return _save(fig, Path(path))


def plot_formation_error(trace: SimTrace, path) -> Path:
    t = trace.sim_times
    err = np.asarray(trace.errors)
    eps = _scenario(trace).get("epsilon")
    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=FIGSIZE)
        ax = fig.add_subplot()
        ax.plot(t, err, color="k", marker="." if len(t) == 1 else None, gid="formation-error")
        if eps is not None:
            ax.axhline(eps, color="tab:red", ls="--", lw=0.8, label=f"ε = {eps:g}")
            ax.legend(loc="upper right")
        if trace.load_tick is not None:
            ax.axvline(trace.load_tick * trace.dt, color="0.5", ls=":", lw=0.8)
        if np.all(err[np.isfinite(err)] > 0) and len(err) > 1:
            ax.set_yscale("log")
        ax.set_xlabel("simulated time [s]")
        ax.set_ylabel("mean distance to goal")
        ax.set_title("Formation error")
        return _save(fig, Path(path))


def plot_distance(trace: SimTrace, path) -> Path:
    t = trace.sim_times
    dist = trace.array("distances")
    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=FIGSIZE)
        ax = fig.add_subplot()
        for i, c in enumerate(_colors(trace.N)):
            (line,) = ax.plot(t, dist[:, i], color=c, marker="." if len(t) == 1 else None, label=f"{i + 1}")
            line.set_gid(f"distance-{i + 1}")
        if trace.load_tick is not None:
            ax.axvline(trace.load_tick * trace.dt, color="0.5", ls=":", lw=0.8)
        ax.set_xlabel("simulated time [s]")
        ax.set_ylabel("distance traveled")
        ax.set_title("Distance traveled by each agent")
        ax.legend(title="agent", ncol=2, fontsize=7, loc="upper left")
        return _save(fig, Path(path))


def plot_regions(trace: SimTrace, path) -> Path:
    """Assembly region: circle, inscribed square, triangle grid, segments, object and goals."""
    meta = _scenario(trace)
    circle_ev = next((ev for ev in trace.events if ev.kind == "circle"), None)
    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=(5.6, 5.6))
        ax = fig.add_subplot()
        if circle_ev is None:
            ax.text(0.5, 0.5, "no region was fitted", ha="center", transform=ax.transAxes)
            return _save(fig, Path(path))
        c = np.array([circle_ev.payload["x"], circle_ev.payload["y"]])
        circle = CircleRegion(c, circle_ev.payload["r"])
        ax.add_patch(Circle(c, circle.radius, fill=False, ec="tab:blue", gid="region"))
        square = inscribe_square(circle)
        ax.add_patch(PolygonPatch(square.corners, closed=True, fill=False, ec="k", lw=0.8, gid="inscribed-square"))

        n = int(meta.get("n", 1))
        grid = pack_triangles(circle, n)
        lo = grid.anchor
        side = grid.l_ss * n
        ticks = lo[None, :] + grid.l_ss * np.arange(n + 1)[:, None]
        segs = [[(x, lo[1]), (x, lo[1] + side)] for x in ticks[:, 0]]
        segs += [[(lo[0], y), (lo[0] + side, y)] for y in ticks[:, 1]]
        # anti-diagonals of every sub-square
        for q1 in range(n):
            for q2 in range(n):
                x0, y0 = lo[0] + q2 * grid.l_ss, lo[1] + q1 * grid.l_ss
                segs.append([(x0 + grid.l_ss, y0), (x0, y0 + grid.l_ss)])
        ax.add_collection(LineCollection(segs, colors="m", linewidths=0.15 if n > 10 else 0.6, gid="triangle-grid"))

        r = circle.radius
        ax.plot([c[0] - r, c[0] + r], [c[1], c[1]], color="0.4", lw=0.6, ls="--")
        ax.plot([c[0], c[0]], [c[1] - r, c[1] + r], color="0.4", lw=0.6, ls="--")
        for k, ang in enumerate((math.pi / 4, 3 * math.pi / 4, 5 * math.pi / 4, 7 * math.pi / 4)):
            ax.text(c[0] + 0.8 * r * math.cos(ang), c[1] + 0.8 * r * math.sin(ang), f"S{k + 1}", ha="center", va="center")

        if "footprint" in meta:
            ax.add_patch(PolygonPatch(np.asarray(meta["footprint"]) + c, closed=True, fill=False, ec="tab:orange", lw=1.2, gid="footprint"))
        assign = next((ev for ev in trace.events if ev.kind == "assignment"), None)
        if assign is not None:
            g = np.asarray(assign.payload["goals"])
            ax.plot(g[:, 0], g[:, 1], "x", color="tab:green", ms=6, mew=1.5, gid="goals")
        p0 = trace.positions[0]
        ax.plot(p0[:, 0], p0[:, 1], "*", color="tab:blue", ms=6, gid="starts")

        ax.set_aspect("equal", adjustable="datalim")
        ax.set_title(f"Assembly region: n = {n}, {2 * n * n} triangles")
        ax.autoscale_view()
        return _save(fig, Path(path))


PLOTTERS = {
    "trajectories": plot_trajectories,
    "formation-error": plot_formation_error,
    "distance": plot_distance,
    "regions": plot_regions,
}


def render(trace: SimTrace, flags, out_dir, stem: str) -> list[Path]:
    """Write one ``<stem>.<flag>.svg`` per requested flag."""
    if len(trace) == 0:
        raise EmptyTrace("trace has no tick rows")
    out_dir = Path(out_dir)
    paths = []
    for flag in flags:
        if flag not in PLOTTERS:
            raise ValueError(f"unknown plot {flag!r} (choose from {', '.join(PLOTTERS)})")
        paths.append(PLOTTERS[flag](trace, out_dir / f"{stem}.{flag}.svg"))
    return paths
