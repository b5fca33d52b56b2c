import pytest

from upqi.optics import make_object, make_setup


@pytest.fixture
def std_setup():
    """r1 = r2 = 0.5, all phases zero, alpha = beta = 1."""
    return make_setup(0.5, 0.5, 1.0, 1.0)


@pytest.fixture
def std_pixel():
    return make_object(0.8, 0.0)
