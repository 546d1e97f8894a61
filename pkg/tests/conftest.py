import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).parent
FIXTURES = TESTS / "fixtures"
sys.path.insert(0, str(TESTS))


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def worked_dialogs():
    return sorted((FIXTURES / "worked").glob("*.json"))


def synthetic_dialogs():
    return sorted((FIXTURES / "synthetic").glob("*.json"))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
