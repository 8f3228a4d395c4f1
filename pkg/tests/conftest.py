import pytest

_ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def acceptance_record():
    """Callable that files a criterion's PASS/FAIL line for the summary."""

    def record(result):
        _ACCEPTANCE_LINES[result.number] = f"{result.line()} ({result.seconds:.1f} s)"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(_ACCEPTANCE_LINES[number])
