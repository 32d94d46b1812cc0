import numpy as np
import pytest

from simapprox.conformal import build_map
from simapprox.geometry import builtin_domain

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def domains():
    return {name: builtin_domain(name) for name in ("disk", "ellipse", "segment", "square", "lshape")}


@pytest.fixture(scope="session")
def maps(domains):
    return {name: build_map(E) for name, E in domains.items()}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
