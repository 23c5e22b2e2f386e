import math

import pytest

from qumodes import (
    amplitude_from_power_db,
    db_to_variance,
    signal_power_db,
    squeezing_db_to_e2r,
    squeezing_db_to_r,
    variance_to_db,
)
from qumodes.units import VACUUM_VARIANCE, r_to_e2r


@pytest.mark.parametrize("variance", [0.25, 0.5, 0.1, 1.7, 3.2e-4])
def test_db_roundtrip(variance):
    assert db_to_variance(variance_to_db(variance)) == pytest.approx(variance, abs=1e-12)


def test_vacuum_is_zero_db():
    assert variance_to_db(VACUUM_VARIANCE) == 0.0
    assert variance_to_db(0.5) == pytest.approx(3.010299956639812, abs=1e-12)


def test_squeezing_db_conventions_agree():
    # e^{-2r} from the dB magnitude, via either conversion path
    assert squeezing_db_to_e2r(4.5) == pytest.approx(0.35481338923357547, abs=1e-15)
    for db in (0.0, 1.0, 4.5, 10.0):
        assert r_to_e2r(squeezing_db_to_r(db)) == pytest.approx(
            squeezing_db_to_e2r(db), abs=1e-14
        )


def test_zero_db_means_no_squeezing():
    assert squeezing_db_to_r(0.0) == 0.0
    assert squeezing_db_to_e2r(0.0) == 1.0


def test_negative_squeezing_db_rejected():
    with pytest.raises(ValueError):
        squeezing_db_to_r(-4.5)
    with pytest.raises(ValueError):
        squeezing_db_to_e2r(-1.0)


def test_nonpositive_variance_rejected():
    with pytest.raises(ValueError):
        variance_to_db(0.0)
    with pytest.raises(ValueError):
        variance_to_db(-0.5)


def test_amplitude_from_power_db():
    amp = amplitude_from_power_db(13.8)
    assert amp == pytest.approx(2.4488940968422312, abs=1e-14)
    # a pure mean at this amplitude carries exactly the quoted power
    assert 10.0 * math.log10(amp * amp / VACUUM_VARIANCE) == pytest.approx(13.8, abs=1e-12)


def test_signal_power_combines_mean_and_variance():
    assert signal_power_db(0.0, 0.25) == 0.0
    assert signal_power_db(0.5, 0.25) == pytest.approx(variance_to_db(0.5), abs=1e-12)
