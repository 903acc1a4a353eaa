import sys

import numpy as np
import pytest

from fbmsde.paths import SamplePath, TimeGrid


@pytest.fixture
def grid256():
    return TimeGrid.uniform_grid(1.0, 256)


def poly(grid, k):
    return SamplePath.from_function(grid, lambda t: t ** k)


@pytest.fixture
def make_poly():
    return poly


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", {})
    lines = [results[k] for k in sorted(results)]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
