import sys

import pytest

from shortexp import worked_example as ex
from shortexp.linalg import Mode


@pytest.fixture(params=[Mode.EXACT, Mode.FLOAT], ids=["exact", "float"])
def mode(request):
    return request.param


@pytest.fixture
def ref_system():
    return ex.system()


@pytest.fixture
def ref_log():
    return ex.log()


@pytest.fixture
def modified_log():
    return ex.modified_log()


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
