"""Prints one pass/fail line per acceptance criterion after every run."""

_results: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    label = report.nodeid.split("::")[-1]
    if report.when == "call":
        _results[label] = "PASS" if report.passed else "FAIL"
    elif report.when == "setup" and not report.passed:
        _results[label] = "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome in _results.items():
        terminalreporter.write_line(f"{outcome}  {label}")
