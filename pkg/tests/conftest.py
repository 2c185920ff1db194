import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from suctionflow.solver import FlowConfig
from suctionflow.spaces import RadialGrid, ZetaGrid

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def grid():
    return RadialGrid()


@pytest.fixture(scope="session")
def fine_grid():
    return RadialGrid(1024)


@pytest.fixture(scope="session")
def zgrid():
    return ZetaGrid()


@pytest.fixture(scope="session")
def cfg():
    return FlowConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
