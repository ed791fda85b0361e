import numpy as np
import pytest

from linefield.ratmap import RationalMap


@pytest.fixture(scope="session")
def quad_c0():
    return RationalMap([0, 0, 1], [1])


@pytest.fixture(scope="session")
def basilica():
    return RationalMap([-1.0, 0, 1], [1])


@pytest.fixture(scope="session")
def chebyshev():
    return RationalMap([-2.0, 0, 1], [1])


@pytest.fixture(scope="session")
def lattes():
    return RationalMap([1, 0, 2, 0, 1], [0, -4.0, 0, 4.0])


@pytest.fixture(scope="session")
def rational_a():
    # z / (z^2 + 4): f(inf) = 0, critical values +/- 1/4
    return RationalMap([0, 1], [4.0, 0, 1], kind="rational")


def pytest_addoption(parser):
    parser.addoption("--runtime-slack", type=float, default=1.0,
                     help="multiplier applied to wall-clock budgets")


@pytest.fixture(scope="session")
def runtime_slack(request):
    return request.config.getoption("--runtime-slack")


def assert_close(got, want, tol, label=""):
    got = complex(got) if np.ndim(got) == 0 else np.asarray(got)
    err = np.max(np.abs(got - want))
    assert err <= tol, f"{label}: |{got} - {want}| = {err:.3e} > {tol:.1e}"
