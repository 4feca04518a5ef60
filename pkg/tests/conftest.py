import pytest


@pytest.fixture
def acceptance_line(request):
    """Record one criterion line for the terminal summary and echo it."""

    def record(number, passed, text):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {text}"
        request.config.__dict__.setdefault("_acceptance_lines", []).append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.__dict__.get("_acceptance_lines")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
