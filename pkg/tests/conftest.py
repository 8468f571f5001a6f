from pathlib import Path

import pytest

from ctabledb.engine import Engine

DATA = Path(__file__).parent / "data"
EMP_SCRIPT = (DATA / "emp.csql").read_text()


def load_emp() -> Engine:
    engine = Engine()
    for _ in engine.run_script(EMP_SCRIPT):
        pass
    return engine


@pytest.fixture
def emp() -> Engine:
    return load_emp()


@pytest.fixture
def code(emp):
    """Dictionary code of a string in the Emp database."""
    return emp.db.dictionary.lookup


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
