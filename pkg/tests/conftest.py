import pytest

from fracbin import HurstParams


@pytest.fixture(scope="session")
def p06():
    return HurstParams(0.6)


@pytest.fixture(scope="session")
def p075():
    return HurstParams(0.75)


@pytest.fixture(scope="session")
def p08():
    return HurstParams(0.8)


@pytest.fixture(scope="session")
def p09():
    return HurstParams(0.9)
