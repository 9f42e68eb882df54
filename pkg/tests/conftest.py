import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# filled by tests/test_acceptance.py, one (criterion, status, detail) per test
ACCEPTANCE_LINES = []


def _order(row):
    head = row[0].split()[0]
    return (int(head), row[0]) if head.isdigit() else (99, row[0])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for crit, status, detail in sorted(ACCEPTANCE_LINES, key=_order):
        terminalreporter.write_line(f"{status:<4} {crit}: {detail}")
