import math

import numpy as np
import pytest

from wedgelab.retmap import MapConstants, derive_constants, peak_value, SaddleValues


@pytest.fixture(scope="session")
def c_k1() -> MapConstants:
    """delta = 3, twist K = 1, with usable stage rates."""
    # (c1, e1, c2, e2) = (3, 3, 4.5, 1.5): delta = (3*4.5)/(3*1.5) = 3,
    # K = (1.5 + 3)/(3*1.5) = 1
    return derive_constants(SaddleValues(3.0, 3.0, 4.5, 1.5, 1.0))


@pytest.fixture(scope="session")
def c_k2() -> MapConstants:
    """delta = 3, twist K = 2."""
    return derive_constants(SaddleValues(1.0, 1.0, 3.0, 1.0, 1.0))


@pytest.fixture(scope="session")
def peak3() -> float:
    return peak_value(3.0)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20260823)


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance: end-to-end acceptance criteria (slower)"
    )


# one line per acceptance criterion, echoed after the run so the verdict
# survives output capture
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
