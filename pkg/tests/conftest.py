from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from swarmsim.engine import Scenario, run
from swarmsim.geometry import Polygon
from swarmsim.phase1 import ObjectFootprint
from swarmsim.scenario import load_scenario

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"
DATA = Path(__file__).resolve().parent / "data"

settings.register_profile("default", deadline=None, print_blob=True)
settings.load_profile("default")

# filled by test_acceptance.py, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def open_field_scenario():
    return load_scenario(SCENARIOS / "open_field.scenario")


@pytest.fixture(scope="session")
def open_field_trace(open_field_scenario):
    return run(open_field_scenario)


@pytest.fixture(scope="session")
def smoke_trace():
    return run(load_scenario(SCENARIOS / "smoke.scenario"))


def open_field(positions, target=(20.0, 0.0), **kw) -> Scenario:
    kw.setdefault("footprint", ObjectFootprint(Polygon.regular(8, 2.0)))
    return Scenario(initial_positions=np.asarray(positions, dtype=float), target=target, **kw)
