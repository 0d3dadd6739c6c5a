import numpy as np
import pytest

from vndarboux.seeds import example3x3, example8x8


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def ex3():
    return example3x3()


@pytest.fixture(scope="session")
def ex8():
    return example8x8()


@pytest.fixture(autouse=True)
def _unit_tolerance_scale(monkeypatch):
    # tests assume the default tolerances unless they set the scale themselves
    monkeypatch.delenv("VN_TOLERANCE_SCALE", raising=False)
