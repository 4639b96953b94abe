"""Shared verdict reporting for the acceptance suite.

Acceptance tests push one summary line per criterion through
``record``; the lines are replayed after the run in a dedicated
terminal section so they stay visible under output capture.
"""

VERDICTS = []


def record(line: str) -> None:
    VERDICTS.append(line)
    print(line, flush=True)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if VERDICTS:
        terminalreporter.section("acceptance verdicts")
        for line in VERDICTS:
            terminalreporter.write_line(line)
