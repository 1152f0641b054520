import numpy as np
import pytest

from muskat_lab.verify import random_field


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def smooth_pair(rng):
    f = random_field(rng, 64, max_slope=1.2)
    w = random_field(rng, 64)
    return f, w


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one acceptance line: report(number, label, measured, bound, ok)."""
    def _report(number, label, measured, bound, ok):
        line = f"{'PASS' if ok else 'FAIL'}  [{number:>2}] {label}: measured {measured} (need {bound})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
