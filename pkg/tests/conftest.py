import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from minorwalk.graph import BoundedDegreeGraph

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def path_graph(n, d=2):
    return BoundedDegreeGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)], d)


def k2(d=1):
    return BoundedDegreeGraph.from_edges(2, [(0, 1)], d)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, repeated after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
