import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

_ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def report():
    """Record one acceptance line; the test still asserts on ``ok`` itself."""

    def _report(number: int, title: str, ok: bool, detail: str = "") -> bool:
        prev = _ACCEPTANCE.get(number)
        if prev is not None:
            ok = ok and prev[1]
            detail = f"{prev[2]}; {detail}" if prev[2] else detail
        _ACCEPTANCE[number] = (title, bool(ok), detail)
        return bool(ok)

    return _report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, ok, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {n:2d}. {title}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
