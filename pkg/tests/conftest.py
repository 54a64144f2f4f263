import pytest

from owip.grid import fig1_grid, paper_grid
from owip.topo import extract_topo


@pytest.fixture(scope="session")
def fig1():
    return fig1_grid()


@pytest.fixture(scope="session")
def paper():
    return paper_grid()


@pytest.fixture(scope="session")
def fig1_topo(fig1):
    return extract_topo(fig1)


ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion, echoed in the terminal summary."""

    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
