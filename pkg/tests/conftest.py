import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from budget_pds import build_instance

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def tiny():
    """Two agents, one topic: a12 = 1, w = 1, p = (4, 0), c = 1, B = (2, 10)."""
    return build_instance([[0, 1], [1, 0]], [[4], [0]], 1.0, 1.0, [2, 10])


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
