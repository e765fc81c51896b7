"""Shared pytest wiring for the suite.

Collects the per-criterion verdict lines produced by the acceptance
tests and prints them in the terminal summary, where output capture
cannot swallow them.
"""

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
