import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# One PASS/FAIL line per acceptance criterion, repeated in the terminal summary.
_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    def record(label, ok, detail=""):
        """Print and keep the PASS/FAIL line, then fail the test on FAIL."""
        __tracebackhide__ = True
        line = f"{label}: {'PASS' if ok else 'FAIL'}" + (f"  ({detail})" if detail else "")
        print(line)
        _ACCEPTANCE_LINES.append(line)
        if not ok:
            raise AssertionError(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
