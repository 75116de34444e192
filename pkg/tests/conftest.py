import numpy as np
import pytest

from qham_forge.lie import make_group_model

ALL_GROUPS = ["su2", "su3", "so3", "torus:2", "prod:su2,su2"]
NONABELIAN = ["su2", "su3", "so3", "prod:su2,su2"]


@pytest.fixture(params=ALL_GROUPS)
def any_model(request):
    return make_group_model(request.param)


@pytest.fixture(params=NONABELIAN)
def nonabelian_model(request):
    return make_group_model(request.param)


@pytest.fixture
def su2():
    return make_group_model("su2")


@pytest.fixture
def su3():
    return make_group_model("su3")


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS, summary_lines

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in summary_lines():
            terminalreporter.write_line(line)
