import pytest

from commons_sim.knapsack import table1_instance, solve_dp

_CRITERIA = []


@pytest.fixture(scope="session")
def table1():
    return table1_instance()


@pytest.fixture(scope="session")
def table1_opt(table1):
    return solve_dp(table1)


@pytest.fixture(scope="session")
def criteria():
    """Collects (criterion, passed, detail) rows for the end-of-run summary."""
    return _CRITERIA


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(_CRITERIA, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
