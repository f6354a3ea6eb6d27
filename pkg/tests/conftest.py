import numpy as np
import pytest

from co2lstm.ingest import Sector

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def csv_rows(rows, header="region,date,sector,value"):
    return (header + "\n" + "\n".join(rows) + "\n").encode()


ALL_SECTORS = [s.value for s in Sector]
