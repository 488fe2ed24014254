import contextlib

import pytest

_ACCEPTANCE: list[tuple[str, bool, str]] = []


class _Record:
    detail = ""


@pytest.fixture
def criterion():
    """Context manager that logs PASS/FAIL for one acceptance criterion."""

    @contextlib.contextmanager
    def run(name):
        rec = _Record()
        try:
            yield rec
        except BaseException as exc:
            msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
            _ACCEPTANCE.append((name, False, f"{rec.detail} {msg}".strip()))
            raise
        _ACCEPTANCE.append((name, True, rec.detail))

    return run


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
