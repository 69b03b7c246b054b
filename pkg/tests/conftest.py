import pytest

from flatrank.config import get_settings
from flatrank.services import generators
from flatrank.services.koszul_service import restricted_flattening


@pytest.fixture(autouse=True)
def fresh_settings():
    # Settings are cached per process; tests that set FLATRANK_* env vars need a fresh read
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def cw2():
    return generators.cw_tensor(2)


@pytest.fixture
def cw3():
    return generators.cw_tensor(3)


@pytest.fixture(scope="module")
def square_difference_q5():
    return restricted_flattening(5, 2, "Sq")


@pytest.fixture(scope="module")
def cube_difference_q6():
    return restricted_flattening(6, 3, "Sq")
