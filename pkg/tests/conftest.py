from __future__ import annotations

import numpy as np
import pytest

from trajsim import fixtures
from trajsim.core import Trajectory


@pytest.fixture
def q1():
    return fixtures.running_example()["Q1"]


@pytest.fixture
def q2():
    return fixtures.running_example()["Q2"]


@pytest.fixture
def grid_net():
    return fixtures.example_network()


@pytest.fixture
def matched():
    return fixtures.example_matched()


def random_traj(rng, lo=2, hi=8, scale=10.0, tid=None):
    n = int(rng.integers(lo, hi + 1))
    return Trajectory(tid, rng.uniform(0.0, scale, size=(n, 2)))


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
