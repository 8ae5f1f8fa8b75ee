import pytest

_RESULTS: dict = {}


@pytest.fixture
def acceptance():
    """Record ``(criterion, passed, detail)`` for the closing summary."""

    def record(key: str, passed: bool, detail: str = "") -> bool:
        _RESULTS[key] = (bool(passed), detail)
        return bool(passed)

    return record


def _order(key):
    num = "".join(ch for ch in key if ch.isdigit())
    return int(num or 0), key


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_RESULTS, key=_order):
        ok, detail = _RESULTS[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
