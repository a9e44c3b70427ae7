"""Shared fixtures and the acceptance summary hook."""

import pytest

from ris_cellfree import scenario as sc

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def desk():
    """The documented reference desk scenario (seed 2)."""
    return sc.desk_scenario()


@pytest.fixture(scope="session")
def acceptance_record():
    """Collect one pass/fail line per acceptance criterion."""
    def _record(line):
        ACCEPTANCE_LINES.append(line)
        print(line)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
