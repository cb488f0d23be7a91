import sys
from pathlib import Path

import pytest

from fpmslice import kernels

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"
sys.path.insert(0, str(HERE))

ACCEPTANCE = {
    "AC1": "motivating-example slice reproduction",
    "AC2": "slicer oracle equivalence on random graphs",
    "AC3": "dependent-file query correctness and visit bound",
    "AC4": "edge rule conformance (F/S/V)",
    "AC5": "cross-file context recovery",
    "AC6": "voting and scoring arithmetic",
    "AC7": "end-to-end determinism",
    "AC8": "round-trip fidelity",
    "AC9": "throughput sanity",
}
_results: dict[str, list[str]] = {}


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture(params=sorted(kernels.BACKENDS))
def backend(request):
    return request.param


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker:
            item.user_properties.append(("criterion", marker.args[0]))


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _results.setdefault(crit, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for crit, title in ACCEPTANCE.items():
        outcomes = _results.get(crit)
        if not outcomes:
            status = "NOT RUN"
        elif all(o == "passed" for o in outcomes):
            status = "PASS"
        else:
            status = "FAIL"
        terminalreporter.write_line(f"{crit} {status:7s} {title}")
