import pytest

from rgre.problems import get_problem


@pytest.fixture(scope="session")
def dahlquist():
    return get_problem("dahlquist")


@pytest.fixture(scope="session")
def lotka_volterra():
    return get_problem("lotka-volterra")


@pytest.fixture(scope="session")
def van_der_pol():
    return get_problem("van-der-pol")
