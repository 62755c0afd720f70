import pytest

from uavplace.config import ScenarioConfig
from uavplace.scenario import prepare

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def small_config():
    # 3 users per region, 4 candidates per region -> 256 combinations
    return ScenarioConfig(users_per_region=3, grid_nx=2, grid_ny=1, grid_nz=2, seed=5)


@pytest.fixture
def small_gaussian():
    return ScenarioConfig(users_per_region=3, grid_nx=2, grid_ny=1, grid_nz=2, seed=9, gain_mode="gaussian")


@pytest.fixture
def small_solved(small_config):
    return prepare(small_config)
