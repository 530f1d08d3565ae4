import math

import pytest

from comsat import ElevationGeometry, SystemParams

ETAS = (math.pi / 6, math.pi / 4, math.pi / 3)


@pytest.fixture
def params():
    return SystemParams()


@pytest.fixture(params=ETAS, ids=["pi/6", "pi/4", "pi/3"])
def eta(request):
    return request.param


@pytest.fixture
def geom(params):
    return ElevationGeometry.from_eta(params, math.pi / 4)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report():
    """Record one verdict line per acceptance criterion; printed after the run."""
    def record(number, title, passed, detail):
        ACCEPTANCE_LINES.append((number, f"criterion {number} [{'PASS' if passed else 'FAIL'}] "
                                         f"{title}: {detail}"))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
