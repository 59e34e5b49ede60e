import numpy as np
import pytest

from upbkit.constructions import build_334, shifts_upb


@pytest.fixture(scope="session")
def upb334():
    return build_334()


@pytest.fixture(scope="session")
def shifts():
    return shifts_upb()


@pytest.fixture(scope="session")
def protocol_tree():
    from upbkit.protocol import build_appendix_d_tree

    return build_appendix_d_tree()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
