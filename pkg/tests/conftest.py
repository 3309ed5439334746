import numpy as np
import pytest

from dynkc.metric import MetricSpace


def line_space(xs, d_min=1.0, d_max=None, seed=0, **kw):
    """Points on the real line with ids 0..len(xs)-1."""
    d_max = d_max if d_max is not None else max(1.0, max(xs) - min(xs))
    m = MetricSpace(d_min, d_max, dim=1, seed=seed, **kw)
    for i, x in enumerate(xs):
        m.add(i, [x])
    return m


def grid_space(n, dim=2, box=100, seed=0, add=True):
    """n random integer-grid points; ids 0..n-1."""
    rng = np.random.default_rng(seed)
    m = MetricSpace(1.0, box * np.sqrt(dim), dim=dim, seed=seed)
    pts = rng.integers(0, box + 1, size=(n, dim)).astype(float)
    if add:
        for i, p in enumerate(pts):
            m.add(i, p)
    return m, pts


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE: dict[int, str] = {}


def record(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
