import sys
from pathlib import Path

# make tests/oracles.py importable regardless of the invocation directory
sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA: dict = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    detail = dict(report.user_properties).get("measured", "")
    _CRITERIA[name] = ("PASS" if report.outcome == "passed" else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, (verdict, detail) in sorted(_CRITERIA.items()):
        terminalreporter.write_line(f"{verdict} {name}" + (f"  [{detail}]" if detail else ""))
