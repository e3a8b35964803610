import numpy as np
import pytest

from shockcell.eos import MaterialParams, air, polystyrene, water


@pytest.fixture(scope="session")
def materials():
    return {"air": air(), "water": water(), "polystyrene": polystyrene()}


@pytest.fixture()
def rng():
    return np.random.default_rng(20260809)


def sod_material() -> MaterialParams:
    """Ideal gas in the dimensionless units of the classic shock-tube problem."""
    return MaterialParams("air", 1.4, 0.0, 1.0)
