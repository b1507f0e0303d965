from __future__ import annotations

import re

_CRITERIA: dict[int, tuple[str, bool]] = {}
_NAME = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_runtest_logreport(report):
    m = _NAME.search(report.nodeid)
    if not m:
        return
    k, title = int(m.group(1)), m.group(2).replace("_", " ")
    ok = _CRITERIA.get(k, (title, True))[1]
    if report.failed or (report.when == "call" and not report.passed):
        ok = False
    _CRITERIA[k] = (title, ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        title, ok = _CRITERIA[k]
        terminalreporter.write_line(f"criterion {k} ({title}): {'PASS' if ok else 'FAIL'}")
