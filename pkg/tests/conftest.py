"""Collects the acceptance-check summary lines and prints them at the end.

Pytest captures per-test output, so the one-line PASS/FAIL verdicts from
tests/test_acceptance.py are gathered here and emitted as a dedicated
section in the terminal summary, where they always appear.
"""

acceptance_lines: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not acceptance_lines:
        return
    terminalreporter.section("acceptance summary")
    for line in acceptance_lines:
        terminalreporter.write_line(line)
