import numpy as np
import pytest

_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record a one-line pass/fail verdict for the acceptance summary."""

    def record(label, passed, detail):
        _ACCEPTANCE.append(f"{'PASS' if passed else 'FAIL'}  {label}: {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
