import numpy as np
import pytest
from hypothesis import strategies as st

from qtradeoff.measurement import Measurement

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def report():
    def _record(number: int, passed: bool, detail: str = ""):
        ACCEPTANCE[number] = (bool(passed), detail)
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(
            f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


@st.composite
def measurements(draw, min_d=2, max_d=6, ties=True, zeros=True, scale=False):
    """Valid measurements; with ``ties`` entries repeat often, hitting every block pattern."""
    d = draw(st.integers(min_d, max_d))
    if ties:
        pool = draw(st.lists(st.sampled_from([1.0, 0.9, 0.75, 0.5, 0.3, 0.1]
                                             + ([0.0] if zeros else [])),
                             min_size=1, max_size=3))
        vals = draw(st.lists(st.one_of(st.sampled_from(pool),
                                       st.floats(0.0 if zeros else 0.01, 1.0)),
                             min_size=d - 1, max_size=d - 1))
    else:
        vals = draw(st.lists(st.floats(0.0 if zeros else 0.01, 1.0), min_size=d - 1,
                             max_size=d - 1))
    lam = np.sort(np.array([1.0] + vals))[::-1]
    if scale:
        lam = lam * draw(st.floats(0.05, 1.0))
    return Measurement(lam)


@st.composite
def smooth_measurements(draw, min_d=2, max_d=6, gap=1e-3):
    """All entries distinct and positive, so every closed form is differentiable."""
    d = draw(st.integers(min_d, max_d))
    lam = [1.0]
    for _ in range(d - 1):
        hi = lam[-1] - gap
        if hi <= gap:
            break
        lam.append(draw(st.floats(gap, hi)))
    if len(lam) < 2:
        lam.append(0.5)
    return Measurement(np.array(lam))


def random_smooth(rng: np.random.Generator, d: int, gap: float = 0.02) -> Measurement:
    """Random measurement with distinct positive entries separated by ``gap``."""
    while True:
        lam = np.sort(rng.uniform(gap, 1.0, d))[::-1]
        lam /= lam[0]
        if np.all(-np.diff(lam) > gap) and lam[-1] > gap:
            return Measurement(lam)


def random_with_ties(rng: np.random.Generator, d: int) -> Measurement:
    """Random measurement whose entries are drawn from a few levels, zeros included."""
    levels = np.concatenate([[1.0, 0.0], rng.uniform(0.05, 1.0, 2)])
    lam = rng.choice(levels, size=d, p=[0.3, 0.2, 0.25, 0.25])
    if rng.random() < 0.5:
        lam = np.where(rng.random(d) < 0.5, lam, rng.uniform(0, 1, d))
    lam = np.sort(lam)[::-1]
    if lam[0] == 0:
        lam[0] = 1.0
    return Measurement(np.sort(lam / lam[0])[::-1])
