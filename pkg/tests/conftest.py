from __future__ import annotations

import pytest

from delaynet import fixtures

_ACCEPTANCE: list[tuple[int, str, bool, str]] = []


@pytest.fixture
def acceptance_line():
    """Call with (number, title, passed, detail) to log one criterion."""

    def record(number: int, title: str, passed: bool, detail: str = "") -> None:
        line = f"ACCEPTANCE {number:2d} {'PASS' if passed else 'FAIL'} {title}"
        if detail:
            line += f" ({detail})"
        print(line)
        _ACCEPTANCE.append((number, title, passed, detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE):
        line = f"{number:2d} {'PASS' if passed else 'FAIL'} {title}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def exact_catalogue():
    return fixtures.catalogue(exact=True)


@pytest.fixture(scope="session")
def float_catalogue():
    return fixtures.catalogue(exact=False)
