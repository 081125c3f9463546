import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE: dict = {}


def record(number: int, title: str, passed: bool, detail: str):
    ACCEPTANCE[number] = (title, bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d} [{'PASS' if ok else 'FAIL'}] {title}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
