import numpy as np
import pytest

from bilinear_rdf.grid import GridConfig, generate_collection
from bilinear_rdf.operators import ExponentConfig

# PASS/FAIL lines from the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def cfg():
    return ExponentConfig()


def cplx(rng, size):
    return rng.normal(size=size) + 1j * rng.normal(size=size)


@pytest.fixture
def small_instance(rng):
    """A stacked collection at N=64 with random f, g, h."""
    grid = GridConfig(log_size=6)
    c = generate_collection("stacked", 3, grid)
    size = grid.size
    f, g = cplx(rng, size), cplx(rng, size)
    h = {R: cplx(rng, size) for R in c.rects}
    return c, f, g, h, size
