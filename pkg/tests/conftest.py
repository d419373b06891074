import numpy as np
import pytest

from skwave.data import pulse
from skwave.evolve import SpacetimeRecord, evolve
from skwave.grid import make_grid
from skwave.soliton import find_soliton


def static_record(grid, model, u, times=(0.0, 1.0, 2.0, 3.0, 4.0)):
    """Record whose snapshots all equal ``u`` with v = 0."""
    k = len(times)
    return SpacetimeRecord(grid, model, np.array(times, dtype=float),
                           np.tile(u, (k, 1)), np.zeros((k, grid.n_cells)))


@pytest.fixture(scope="session")
def pulse_run_512():
    g = make_grid(20.0, 512)
    start = pulse(g)
    report, rec = evolve(start, 5.0)
    return start, report, rec


@pytest.fixture(scope="session")
def soliton_1024():
    return find_soliton(r_max=50.0, dr=50.0 / 1024)


ACCEPTANCE_LINES: list = []


def record_criterion(name: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
