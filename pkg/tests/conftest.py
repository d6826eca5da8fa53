import functools

import numpy as np
import pytest

from amwu import objectives as objs

ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def catalog(name):
    return tuple(objs.find_critical_points(objs.get_objective(name)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_simplex(rng, d, n=None):
    return rng.dirichlet(np.ones(d), size=n)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
