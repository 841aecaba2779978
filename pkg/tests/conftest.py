import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("curvrigid", max_examples=40, deadline=None, derandomize=True)
settings.load_profile("curvrigid")


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def skew(a):
    return a - a.T


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if not LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(LINES):
        terminalreporter.write_line(LINES[number])
