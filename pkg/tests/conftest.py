"""Shared pytest hooks.

Acceptance tests are named ``test_criterion_NN``.  The hooks below collect
their outcomes and print one verdict line per criterion at the end of the
run, so a plain ``pytest`` invocation shows the acceptance scorecard.
"""

import re

import pytest

_CRITERION = re.compile(r"test_criterion_(\d+)")
_outcomes = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    out = yield
    report = out.get_result()
    match = _CRITERION.search(item.name)
    if match is None:
        return
    number = int(match.group(1))
    doc = getattr(item.function, "__doc__", None) or ""
    label = doc.strip().splitlines()[0] if doc.strip() else ""
    if report.when == "call":
        _outcomes[number] = (report.passed, label)
    elif report.failed:
        # setup or teardown error counts as a failure of the criterion
        _outcomes[number] = (False, label)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        passed, label = _outcomes[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:02d}: {verdict}  {label}")
