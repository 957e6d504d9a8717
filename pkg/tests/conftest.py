"""Collects one verdict line per acceptance criterion and prints them at the end of the run."""

import pytest

_VERDICTS = {}


@pytest.fixture
def verdict(request):
    """Record ``verdict(number, ok, detail)``; the summary prints it as PASS or FAIL."""

    def record(number, ok, detail=""):
        _VERDICTS[number] = (bool(ok), detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        ok, detail = _VERDICTS[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
