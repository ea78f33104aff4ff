import pytest

from hardy import build_model, evolve, initial_state
from models import MeasurementSetting

U, D = MeasurementSetting.U, MeasurementSetting.D


@pytest.fixture
def model():
    return build_model(0.8)


@pytest.fixture
def model_06():
    return build_model(0.6)


@pytest.fixture
def final_dd(model):
    return evolve(initial_state(model.params), (D, D))
