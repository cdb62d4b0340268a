import sys

import pytest

from gsn_forge.dataset import load_dataset


@pytest.fixture(scope="session")
def dataset():
    return load_dataset()


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, _ in module.CRITERIA:
        if name in module.RESULTS:
            terminalreporter.write_line(module.line(name))
