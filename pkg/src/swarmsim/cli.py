"""Command-line front end.

::

    swarmsim validate <file>
    swarmsim run <file> [--out DIR] [--seed S] [--ticks L] [--plot LIST]
    swarmsim plot <trace> [--out DIR] [--plot LIST]

``run`` writes ``<name>.csv`` (per-tick trace), ``<name>.events``,
``<name>.summary.txt`` and one ``<name>.<plot>.svg`` per requested plot.
The output directory is ``--out``, else ``$SWARMSIM_OUT``, else the
scenario's ``output.directory``, else the current directory.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import plotting, traceio
from .engine import OUTCOME_ARRIVED, OUTCOME_TICK_LIMIT, SimTrace, run, scenario_checks
from .errors import EmptyTrace, ScenarioError
from .scenario import PLOT_KINDS, read_scenario

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CODES = {
    OUTCOME_ARRIVED: EXIT_OK,
    "no-free-region": 3,
    "insufficient-capacity": 4,
    "integration-diverged": 5,
    OUTCOME_TICK_LIMIT: 6,
    "agent-in-obstacle": 7,
}

ENV_OUT = "SWARMSIM_OUT"


@dataclass(frozen=True)
class RunOptions:
    scenario_path: Path
    output_directory: Path | None = None
    seed_override: int | None = None
    plot_flags: tuple[str, ...] | None = None
    tick_limit: int | None = None

    def __post_init__(self):
        if self.tick_limit is not None and self.tick_limit <= 0:
            raise ValueError("tick limit must be positive")
        if self.plot_flags is not None:
            bad = [f for f in self.plot_flags if f not in PLOT_KINDS]
            if bad:
                raise ValueError(f"unknown plot(s) {', '.join(bad)}; choose from {', '.join(PLOT_KINDS)}")


def _err(msg: str) -> None:
    print(f"swarmsim: {msg}", file=sys.stderr)


def _plot_list(text: str) -> tuple[str, ...]:
    flags = tuple(f.strip() for f in text.split(",") if f.strip())
    if text.strip() == "all":
        return PLOT_KINDS
    bad = [f for f in flags if f not in PLOT_KINDS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown plot(s) {', '.join(bad)}; choose from {', '.join(PLOT_KINDS)} or 'all'")
    return flags


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def cmd_validate(scenario_path) -> int:
    try:
        s = read_scenario(scenario_path)
    except ScenarioError as exc:
        _err(f"{scenario_path}: {exc}")
        return EXIT_INVALID
    checks = scenario_checks(s)
    for c in checks:
        line = f"{'PASS' if c.passed else 'FAIL'}  {c.name}"
        print(f"{line}  ({c.detail})" if c.detail else line)
    ok = all(c.passed for c in checks)
    print(f"{scenario_path}: {'valid' if ok else 'invalid'}")
    return EXIT_OK if ok else EXIT_INVALID


def _fmt(x, digits=2) -> str:
    return "n/a" if x is None else f"{x:.{digits}f}"


def format_summary(trace: SimTrace) -> str:
    s = trace.summary()
    lines = [
        f"outcome: {s['outcome']}",
        f"total ticks: {s['total_ticks']}",
        f"phase 1 duration: {_fmt(s['phase1_seconds'])} s",
        f"phase 2 duration: {_fmt(s['phase2_seconds'])} s",
        f"final formation error: {_fmt(s['final_formation_error'], 6)}",
        f"plans broadcast: {s['plans']}",
        f"master agent: {s['master'] if s['master'] is not None else 'n/a'}",
        f"support coverage violations: {s['coverage_violations']}",
    ]
    if s["goal_frame_coverage_violations"] is not None:
        lines.append(f"goal-frame coverage violations: {s['goal_frame_coverage_violations']}")
    lines.append(f"minimum pairwise separation: {_fmt(s['min_separation'], 4)}")
    lines.append("distance traveled:")
    lines += [f"  agent {i}: {d:.2f}" for i, d in enumerate(s["distance_traveled"], start=1)]
    if trace.error:
        lines.append(f"error: {trace.error}")
    return "\n".join(lines) + "\n"


def _out_dir(opt_dir, scenario_dir) -> Path:
    if opt_dir is not None:
        return Path(opt_dir)
    if os.environ.get(ENV_OUT):
        return Path(os.environ[ENV_OUT])
    if scenario_dir:
        return Path(scenario_dir)
    return Path.cwd()


def cmd_run(options: RunOptions) -> int:
    try:
        s = read_scenario(options.scenario_path)
    except ScenarioError as exc:
        _err(f"{options.scenario_path}: {exc}")
        return EXIT_INVALID
    if options.seed_override is not None:
        s = dataclasses.replace(s, seed=options.seed_override)
    try:
        trace = run(s, tick_limit=options.tick_limit)
    except ScenarioError as exc:
        _err(f"{options.scenario_path}: {exc}")
        return EXIT_INVALID

    out = _out_dir(options.output_directory, s.output_directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
        trace_path, events_path = traceio.write_trace(trace, out / f"{s.name}.csv")
        summary = format_summary(trace)
        (out / f"{s.name}.summary.txt").write_text(summary)
        flags = options.plot_flags if options.plot_flags is not None else s.plots
        svgs = plotting.render(trace, flags, out, s.name)
    except OSError as exc:
        _err(f"cannot write output to {out}: {exc.strerror or exc}")
        return EXIT_INVALID

    sys.stdout.write(summary)
    for p in (trace_path, events_path, *svgs):
        print(f"wrote {p}")
    code = EXIT_CODES.get(trace.outcome)
    if code is None:
        # an engine error without a documented code must still fail loudly
        _err(f"unexpected outcome {trace.outcome!r}")
        return 1
    return code


def cmd_plot(trace_path, plot_flags=PLOT_KINDS, out_dir=None) -> int:
    trace_path = Path(trace_path)
    try:
        trace = traceio.read_trace(trace_path)
    except EmptyTrace as exc:
        _err(f"empty trace: {exc}")
        return EXIT_INVALID
    except (OSError, ValueError) as exc:
        _err(f"cannot read trace {trace_path}: {exc}")
        return EXIT_INVALID
    out = Path(out_dir) if out_dir is not None else trace_path.parent
    for p in plotting.render(trace, plot_flags, out, trace_path.stem):
        print(f"wrote {p}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="swarmsim", description="Swarm assembly and unit-load transport simulator.")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a scenario's invariants")
    v.add_argument("file", type=Path)

    r = sub.add_parser("run", help="simulate a scenario and write trace, summary and plots")
    r.add_argument("file", type=Path)
    r.add_argument("--out", type=Path, help=f"output directory (default: ${ENV_OUT}, then the scenario's, then .)")
    r.add_argument("--seed", type=int, help="override the master-election seed")
    r.add_argument("--ticks", type=_positive, help="stop after this many ticks")
    r.add_argument("--plot", type=_plot_list, help=f"comma-separated subset of {','.join(PLOT_KINDS)} or 'all'")

    p = sub.add_parser("plot", help="render plots from a written trace")
    p.add_argument("trace", type=Path)
    p.add_argument("--out", type=Path, help="output directory (default: next to the trace)")
    p.add_argument("--plot", type=_plot_list, default=PLOT_KINDS)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        return cmd_validate(args.file)
    if args.command == "run":
        return cmd_run(RunOptions(args.file, args.out, args.seed, args.plot, args.ticks))
    return cmd_plot(args.trace, args.plot, args.out)


if __name__ == "__main__":
    sys.exit(main())
