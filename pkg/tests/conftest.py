import pytest

from beaconsim.controllers import ControllerGrid, default_models


@pytest.fixture(scope="session")
def models():
    """Default radio models with the full delivery table built once."""
    return default_models()


@pytest.fixture(scope="session")
def grid():
    return ControllerGrid()


@pytest.fixture(scope="session")
def coarse_grid():
    """Small search grid so exhaustive references stay cheap."""
    return ControllerGrid(delta_t_hz=1.0, delta_p_db=2.5)
