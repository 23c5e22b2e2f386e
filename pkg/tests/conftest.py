import math

import pytest

from qumodes import squeezing_db_to_r

GAIN_GRID = (0.0, 0.2, 0.5, 1.0 / math.sqrt(2.0), 1.0, math.sqrt(2.0), 2.0)


@pytest.fixture
def r45() -> float:
    """Squeezing parameter of the 4.5 dB resource used throughout."""
    return squeezing_db_to_r(4.5)
