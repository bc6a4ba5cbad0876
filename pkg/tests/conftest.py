import pytest

_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Print and record one ``CRITERION n: PASS/FAIL`` line, then assert it."""

    def report(number: int, ok: bool, detail: str) -> None:
        line = f"CRITERION {number}: {'PASS' if ok else 'FAIL'} {detail}"
        print(line)
        _CRITERIA.append(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
