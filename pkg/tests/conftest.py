"""Shared fixtures and the acceptance summary printed at the end of a run."""

import numpy as np
import pytest

from slcones.cone2 import build_strands, derive_params, natural_periods

_LINES_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES_KEY] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_log(request):
    """Append a summary line; lines are printed after the test session."""
    lines = request.config.stash[_LINES_KEY]

    def log(line: str):
        print(line)
        lines.append(line)

    return log


@pytest.fixture(scope="session")
def generic_cone():
    """A generic superconformal cone with strands over one period box plus margin."""
    params = derive_params(1.0, 0.3, 0.4)
    S, T = natural_periods(params)
    strands = build_strands(params, (0.0, S + 1.0), (0.0, T + 1.0), tol=1e-12)
    return params, strands, S, T


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
