import sys

import pytest
from hypothesis import settings

from metaline.graphene import DEFAULT_SHEET, angular_frequency
from metaline.synthesis import mu_grid, resolve_geometry, sweep_map

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

OMEGA_6UM = angular_frequency(6e-6)


@pytest.fixture(scope="session")
def omega():
    return OMEGA_6UM


@pytest.fixture(scope="session")
def geometry():
    return resolve_geometry(OMEGA_6UM)


@pytest.fixture(scope="session")
def default_map(geometry):
    grid = mu_grid()
    return sweep_map(grid, grid, geometry, OMEGA_6UM, DEFAULT_SHEET)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = [r.line() for r in getattr(module, "RESULTS", [])]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
