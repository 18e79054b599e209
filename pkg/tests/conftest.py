import numpy as np
import pytest

from segregation import kernels as kn
from segregation.grid import GridDensity


def triangle(c=0.0, w=1.0, n=2001, pad=1.5):
    return GridDensity.from_function(lambda x: np.maximum(1 - np.abs(x - c) / w, 0.0), c - pad * w, c + pad * w, n)


@pytest.fixture
def fig1_triple():
    return kn.KernelTriple.multiples(10.0, 1.5)


@pytest.fixture
def kr_triple():
    return kn.KernelTriple.multiples(2.0, 0.5)


ACCEPTANCE_LINES = []


def record(criterion, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
