import numpy as np
import pytest

from heavy_elliptic.rng import RngStream

ACCEPTANCE = {}


def record(criterion: int, ok: bool, detail: str):
    """Store and print one acceptance line."""
    line = f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[criterion] = line
    print(line)
    return ok


@pytest.fixture
def rng():
    return RngStream(12345, 0)


@pytest.fixture
def nprng():
    # numpy generator for test inputs that are not under test themselves
    return np.random.default_rng(2024)


def random_complex(gen, *shape):
    return gen.standard_normal(shape) + 1j * gen.standard_normal(shape)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
