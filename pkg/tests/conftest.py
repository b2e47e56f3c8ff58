"""Shared pytest wiring.

Tests marked ``@pytest.mark.criterion(k, "label")`` are grouped, and after the
run one PASS/FAIL line per criterion is printed in the terminal summary.
"""

from collections import OrderedDict

import pytest

_labels: dict[int, str] = {}
_outcomes: dict[int, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, label): acceptance criterion membership")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, label = mark.args
            _labels.setdefault(number, label)
            _outcomes.setdefault(number, [])


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        _outcomes[mark.args[0]].append(call.excinfo is None)


def pytest_terminal_summary(terminalreporter):
    if not _labels:
        return
    terminalreporter.section("acceptance criteria")
    for number, label in OrderedDict(sorted(_labels.items())).items():
        results = _outcomes.get(number, [])
        status = "PASS" if results and all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2} {status}  {label} ({sum(results)}/{len(results)} checks)")
