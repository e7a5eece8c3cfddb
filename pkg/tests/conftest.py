"""Shared test plumbing: acceptance-criterion result lines.

The acceptance tests record one PASS/FAIL line each; the terminal summary
hook prints them after the run, outside pytest's output capture.
"""

ACCEPTANCE_LINES = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
