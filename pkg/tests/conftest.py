import pytest

_ACCEPTANCE = {}


@pytest.fixture
def record():
    """record(n, title, passed, detail): one verdict line per acceptance criterion."""
    def _record(n, title, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} criterion {n:>2} ({title}): {detail}"
        _ACCEPTANCE[n] = line
        print(line)
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[n])
