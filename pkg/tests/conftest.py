"""Collects acceptance outcomes and prints one line per criterion at the end of the run."""

from collections import OrderedDict

import pytest

_results = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion this test belongs to")


def pytest_runtest_logreport(report):
    item_label = getattr(report, "criterion", None)
    if item_label is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        ok = report.passed and not hasattr(report, "wasxfail")
        entry = _results.setdefault(item_label, [])
        entry.append((report.nodeid.split("::")[-1], ok, report.skipped))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        rep.criterion = mark.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for label, parts in _results.items():
        failed = [name for name, ok, _ in parts if not ok]
        status = "PASS" if not failed else "FAIL"
        line = f"{status}  {label}"
        if failed:
            line += "  (not met: " + ", ".join(failed) + ")"
        terminalreporter.write_line(line)
