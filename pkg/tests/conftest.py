import pytest

from finitekey.guessing import restricted_pg_oracle

ORACLE_QBERS = tuple(round(0.01 * k, 2) for k in range(26))
ORACLE_RESOLUTION = 2000

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def oracle_table():
    """Brute-force guessing probabilities at p = 0, 0.01, ..., 0.25 (computed once)."""
    return {p: restricted_pg_oracle(p, ORACLE_RESOLUTION) for p in ORACLE_QBERS}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
