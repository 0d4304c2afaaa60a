"""Prints one PASS/FAIL line per acceptance criterion at the end of the run."""

import re

_CRITERION = re.compile(r"test_criterion_(\d+)")
_results: dict[int, tuple[str, str, str]] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        props = dict(report.user_properties)
        status = "PASS" if report.passed else "FAIL"
        _results[int(m.group(1))] = (status, props.get("title", ""), props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        status, title, detail = _results[n]
        line = f"criterion {n}: {status}  {title}"
        terminalreporter.write_line(f"{line}  [{detail}]" if detail else line)
