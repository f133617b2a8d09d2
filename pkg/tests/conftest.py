from datetime import datetime, timedelta, timezone

import numpy as np
import pytest
from scipy.stats import norm

from distrep.densities import QuantileFunction, default_prob_grid
from distrep.ingest import CgmRecord, CgmSeries

GRID = default_prob_grid()
T0 = datetime(2022, 5, 2, tzinfo=timezone.utc)


def gaussian_q(mu, sigma, grid=GRID, sid=""):
    return QuantileFunction(grid, mu + sigma * norm.ppf(grid), sid)


def random_quantiles(rng, n, m=None, grid=None, lo=60.0, hi=300.0):
    """Random nondecreasing quantile vectors (sorted uniforms between lo and hi)."""
    if grid is None:
        grid = GRID if m is None else (np.arange(1, m + 1) - 0.5) / m
    out = []
    for i in range(n):
        v = np.sort(rng.uniform(lo, hi, size=grid.size))
        out.append(QuantileFunction(grid, v, f"q{i}"))
    return out


def make_series(values, start=T0, step_min=5, sid="S1", times=None):
    if times is None:
        times = [start + timedelta(minutes=step_min * k) for k in range(len(values))]
    recs = tuple(CgmRecord(sid, t, float(v)) for t, v in zip(times, values))
    return CgmSeries(sid, recs)


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


# acceptance criteria report: one line per criterion in the terminal summary
_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record_criterion():
    def record(number: int, passed: bool, detail: str) -> bool:
        _ACCEPTANCE[number] = (bool(passed), detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
