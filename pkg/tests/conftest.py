import numpy as np
import pytest

from schottky_zeta.resonances import delta_bowen
from schottky_zeta.schottky import cylinder, funnel3


@pytest.fixture(scope="session")
def funnel():
    return funnel3(6, 6, 6)


@pytest.fixture(scope="session")
def delta(funnel):
    return delta_bowen(funnel)


@pytest.fixture(scope="session")
def cyl():
    return cylinder(2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
