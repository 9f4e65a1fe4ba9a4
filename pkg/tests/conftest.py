from collections import defaultdict
from pathlib import Path

import pytest

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "src" / "prodwheel" / "scenarios"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"

CRITERIA = {
    1: "square-root technology under price taking: example values and 100-point sweep",
    2: "linear technology with isoelastic monopoly demand: example values and sweep",
    3: "Shephard, Hotelling and consistency residuals on 75 random scenarios",
    4: "solver optima agree with grid oracles within resolution bounds",
    5: "zero-profit and shutdown thresholds, no-finite-minimum flag",
    6: "zero profit at the zero-profit price with fixed costs",
    7: "constant returns under price taking flagged unbounded",
    8: "CLI golden files byte-identical across runs, exit codes",
}
_criteria: dict[int, str] = {}
_results: dict[int, list[str]] = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number): acceptance criterion")


@pytest.fixture
def scenario_dir():
    return SCENARIO_DIR


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            number = mark.args[0]
            _criteria[number] = CRITERIA[number]


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for number in _criteria:
        if f"[criterion-{number}]" in report.keywords:
            _results[number].append(report.outcome)


def pytest_itemcollected(item):
    mark = item.get_closest_marker("criterion")
    if mark:
        item.keywords[f"[criterion-{mark.args[0]}]"] = True


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        outcomes = _results.get(number, [])
        if not outcomes:
            verdict = "NOT RUN"
        elif all(o == "passed" for o in outcomes):
            verdict = "PASS"
        else:
            verdict = "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict}  {_criteria[number]}")
