import pytest
from mpmath import mp

from mde_forge.qmod import DEFAULT_CONFIG

# filled by test_acceptance; printed once at the end of the run
ACCEPTANCE_LINES = []


@pytest.fixture
def cfg():
    return DEFAULT_CONFIG


@pytest.fixture
def hp():
    """High working precision for oracle computations."""
    with mp.workprec(DEFAULT_CONFIG.precision_bits):
        yield


@pytest.hookimpl(tryfirst=True, hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
