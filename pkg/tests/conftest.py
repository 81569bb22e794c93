import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    """Record one ``PASS``/``FAIL`` line per acceptance criterion.

    Lines are printed immediately (visible with ``-s``) and repeated in the
    terminal summary so that they also appear in captured runs.
    """

    def log(criterion, passed, detail, status=None):
        status = status or ("PASS" if passed else "FAIL")
        line = f"{status} criterion {criterion}: {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        return passed

    return log


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
