"""Shot-noise units and decibel conversions.

The package works in hbar = 1/2 convention: each vacuum quadrature has
variance 1/4, which is the shot-noise level (SNL) all decibel figures
refer to. Squeezing strengths quoted in dB use the positive-magnitude
convention: "4.5" means the squeezed variance sits 4.5 dB below the SNL,
i.e. e^{-2r} = 10^{-4.5/10}.
"""

from __future__ import annotations

import math

VACUUM_VARIANCE = 0.25
"""Variance of each quadrature of the vacuum (the shot-noise level)."""


def variance_to_db(variance: float) -> float:
    """Express a quadrature variance in dB relative to the shot noise."""
    if variance <= 0.0:
        raise ValueError(f"variance must be positive, got {variance}")
    return 10.0 * math.log10(variance / VACUUM_VARIANCE)


def db_to_variance(db: float) -> float:
    """Inverse of :func:`variance_to_db`."""
    return VACUUM_VARIANCE * 10.0 ** (db / 10.0)


def squeezing_db_to_r(db: float) -> float:
    """Squeezing parameter r for a squeezed variance ``db`` below shot noise.

    Defined through e^{-2r} = 10^{-db/10}; db is quoted positive for
    squeezing below the SNL, so squeezing_db_to_r(4.5) is the r of a
    -4.5 dB squeezed vacuum.
    """
    if db < 0.0:
        raise ValueError(f"squeezing dB is quoted as a positive magnitude, got {db}")
    return db * math.log(10.0) / 20.0


def squeezing_db_to_e2r(db: float) -> float:
    """Squeezed-variance suppression factor e^{-2r} for a dB magnitude."""
    if db < 0.0:
        raise ValueError(f"squeezing dB is quoted as a positive magnitude, got {db}")
    return 10.0 ** (-db / 10.0)


def r_to_e2r(r: float) -> float:
    """Suppression factor e^{-2r} of the squeezed quadrature variance."""
    return math.exp(-2.0 * r)


def signal_power_db(mean: float, variance: float) -> float:
    """Total quadrature power, mean squared plus variance, in dB vs shot noise."""
    return variance_to_db(mean * mean + variance)


def amplitude_from_power_db(db: float) -> float:
    """Quadrature mean whose mean-square power sits ``db`` above the shot noise.

    The inverse convention of classical signal power: a coherent input
    quoted at 13.8 dB carries mean a with a^2 / (1/4) = 10^1.38.
    """
    return math.sqrt(db_to_variance(db))
