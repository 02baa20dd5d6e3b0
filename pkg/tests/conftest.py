from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("default")

DATA = Path(__file__).parent / "data"


# (number, title) -> passed so far; a criterion may span several tests.
_CRITERIA: dict[tuple[int, str], bool] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion this test gates")


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    if crit is None:
        return
    failed = report.failed or (report.when == "call" and report.outcome != "passed")
    if report.when == "call" or failed:
        _CRITERIA[crit] = _CRITERIA.get(crit, True) and not failed


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep.criterion = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (num, title), ok in sorted(_CRITERIA.items()):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {num:>2}: {title}")


def paint_label_map(rng: np.random.Generator, h: int, w: int, max_instances: int) -> np.ndarray:
    """Random rectangles and discs painted over each other; later ones win."""
    lm = np.zeros((h, w), dtype=np.int64)
    n = int(rng.integers(0, max_instances + 1))
    yy, xx = np.mgrid[:h, :w]
    for k in range(1, n + 1):
        cx, cy = rng.uniform(0, w), rng.uniform(0, h)
        if rng.random() < 0.5:
            rx, ry = rng.uniform(0, max(w / 2, 1)), rng.uniform(0, max(h / 2, 1))
            shape = (abs(xx - cx) <= rx) & (abs(yy - cy) <= ry)
        else:
            r = rng.uniform(0, max(min(h, w) / 2, 1))
            shape = (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
        lm[shape] = k
    return lm


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
