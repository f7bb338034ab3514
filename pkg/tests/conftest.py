from pathlib import Path

import pytest

from sepconf.catalog import resolve_catalog

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def stub_catalog():
    return resolve_catalog("stub")


@pytest.fixture(scope="session")
def gurobi_catalog():
    return resolve_catalog("gurobi")


@pytest.fixture(scope="session")
def scip_catalog():
    return resolve_catalog("scip")


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
