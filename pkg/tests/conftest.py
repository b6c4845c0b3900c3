import contextlib

import pytest

ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


@contextlib.contextmanager
def criterion(number: int, title: str):
    """Record PASS or FAIL for one acceptance criterion; failures still raise."""
    detail = {"text": ""}
    try:
        yield detail
    except BaseException as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        ACCEPTANCE_RESULTS[number] = (False, f"{title}: {msg}")
        raise
    ACCEPTANCE_RESULTS[number] = (True, f"{title}: {detail['text']}".rstrip(": "))


def format_results() -> list[str]:
    return [
        f"{'PASS' if ok else 'FAIL'} criterion {n}: {text}"
        for n, (ok, text) in sorted(ACCEPTANCE_RESULTS.items())
    ]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in format_results():
            terminalreporter.write_line(line)


@pytest.fixture
def record():
    return criterion
