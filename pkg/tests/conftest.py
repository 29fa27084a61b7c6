import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_criteria = {}


def pytest_runtest_logreport(report):
    match = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not match or report.when not in ("setup", "call"):
        return
    if report.when == "setup" and report.passed:
        return
    detail = dict(report.user_properties).get("detail", "")
    status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
    _criteria[int(match.group(1))] = (status, detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        status, detail = _criteria[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {detail}".rstrip())
