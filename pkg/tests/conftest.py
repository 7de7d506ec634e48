"""Shared model catalog for the test suite."""

import pytest

from levywh import LevyModel, martingale_adjust

# raw (unadjusted) parameter sets used throughout the tests
RAW_CATALOG = {
    "brownian": LevyModel.brownian(0.0, 0.04),
    "nig": LevyModel.nig(5.0, -1.0, 0.5),
    "gh": LevyModel.gh(1.0, 5.0, -1.0, 0.5),
    "vg": LevyModel.vg(4.0, 20.0, 25.0),
    "cgmy": LevyModel.cgmy(1.0, 5.0, 5.0, 1.2),
    "meixner": LevyModel.meixner(0.3, 0.2, 1.0),
}

CATALOG = {name: martingale_adjust(m) for name, m in RAW_CATALOG.items()}


@pytest.fixture(scope="session")
def catalog():
    return CATALOG


@pytest.fixture(scope="session")
def nig():
    return CATALOG["nig"]


@pytest.fixture(scope="session")
def vg():
    return CATALOG["vg"]


# acceptance report ----------------------------------------------------------

ACCEPTANCE = []


def report(number: int, ok: bool, detail: str) -> bool:
    """Record one acceptance line; printed again in the terminal summary."""
    line = f"CRITERION {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append((number, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)
