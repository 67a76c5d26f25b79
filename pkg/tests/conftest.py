import numpy as np
import pytest

from pfvism.grid import Grid
from pfvism.params import PhysicalParams


@pytest.fixture
def p():
    return PhysicalParams()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_grid():
    return Grid((6.0, 5.0, 7.0), (16, 12, 20))


def smooth_random_field(grid: Grid, rng, modes: int = 3, amp: float = 0.3, base: float = 0.5):
    """A smooth periodic field built from a few low Fourier modes."""
    X, Y, Z = grid.mesh()
    out = np.full(grid.shape, base)
    for _ in range(modes):
        k = rng.integers(0, 3, size=3)
        ph = rng.uniform(0, 2 * np.pi)
        arg = np.pi * (k[0] * X / grid.L[0] + k[1] * Y / grid.L[1] + k[2] * Z / grid.L[2]) + ph
        out += amp / modes * np.cos(arg)
    return out


# ---------------------------------------------------------------------------
# acceptance report: one line per criterion at the end of the session

ACCEPTANCE: dict[int, tuple[bool, str]] = {}
N_CRITERIA = 10


@pytest.fixture
def acceptance():
    def record(number: int, passed: bool, detail: str = ""):
        ACCEPTANCE[number] = (bool(passed), detail)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in range(1, N_CRITERIA + 1):
        if k in ACCEPTANCE:
            ok, detail = ACCEPTANCE[k]
            tr.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            tr.write_line(f"criterion {k:2d}: NOT RUN")
