"""Homodyne measurement, conditioning, and classical feed-forward.

A homodyne detector at angle theta measures s(theta) = x cos(theta) -
p sin(theta) of one mode. Conditioning on the outcome removes the mode
and updates the rest by the usual Gaussian rules; the post-measurement
covariance is outcome independent. Feed-forward applies outcome-weighted
displacements: X(s) shifts x by s, Z(s) shifts p by s.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import DegenerateMeasurementError
from .states import Displacement, GaussianState, displace

DEGENERATE_VARIANCE = 1e-12
"""Conditioning on an observable with variance below this is refused."""


@dataclass(frozen=True)
class HomodyneSpec:
    """One homodyne detector: which mode, which quadrature angle.

    ``label`` names the detector in trajectory records and feed-forward
    weights ("s1", "s2", ...). angle = 0 measures x, angle = pi/2
    measures -p.
    """

    mode: int
    angle: float = 0.0
    label: str = "s"

    def observable(self, n_modes: int) -> NDArray[np.float64]:
        """Coefficient vector u with s = u . (x1, p1, ...)."""
        if not 0 <= self.mode < n_modes:
            raise ValueError(f"mode {self.mode} out of range for {n_modes} modes")
        u = np.zeros(2 * n_modes)
        u[2 * self.mode] = math.cos(self.angle)
        u[2 * self.mode + 1] = -math.sin(self.angle)
        return u


@dataclass(frozen=True)
class MeasurementRecord:
    """One detector click of one trajectory."""

    trajectory_id: int
    detector_id: str
    angle: float
    outcome: float


@dataclass(frozen=True)
class FeedforwardRule:
    """Affine map from labelled outcomes to a quadrature displacement.

    The target quadrature of ``target_mode`` is shifted by
    sum_k weights[k] * outcome[k]. ``quadrature`` is "x" (an X(s) shift)
    or "p" (a Z(s) shift).
    """

    target_mode: int
    quadrature: str
    weights: Mapping[str, float]

    def __post_init__(self) -> None:
        if self.quadrature not in ("x", "p"):
            raise ValueError(f"quadrature must be 'x' or 'p', got {self.quadrature!r}")
        object.__setattr__(self, "weights", dict(self.weights))

    def shift(self, outcomes: Mapping[str, float]) -> float:
        try:
            return sum(w * outcomes[k] for k, w in self.weights.items())
        except KeyError as exc:
            raise ValueError(f"feed-forward references unknown outcome {exc}") from exc


def homodyne_statistics(state: GaussianState, spec: HomodyneSpec) -> tuple[float, float]:
    """Mean and variance of the homodyne outcome distribution."""
    u = spec.observable(state.n_modes)
    return float(u @ state.mean), float(u @ state.cov @ u)


def homodyne_sample(state: GaussianState, spec: HomodyneSpec, rng: np.random.Generator) -> float:
    """Draw one outcome; consumes exactly one standard normal from ``rng``."""
    mean, var = homodyne_statistics(state, spec)
    return mean + math.sqrt(var) * float(rng.standard_normal())


def homodyne_condition(state: GaussianState, spec: HomodyneSpec, outcome: float) -> GaussianState:
    """Post-measurement state of the remaining modes given ``outcome``.

    The measured mode is removed. The update is the Gaussian conditional:
    mean' = m_R + c (s - m_s) / v_s and cov' = V_R - c c^T / v_s, where c
    is the cross covariance with the measured observable. A variance v_s
    below 1e-12 raises :class:`DegenerateMeasurementError`.
    """
    u = spec.observable(state.n_modes)
    var = float(u @ state.cov @ u)
    if var < DEGENERATE_VARIANCE:
        raise DegenerateMeasurementError(
            f"observable variance {var:.3e} is below {DEGENERATE_VARIANCE}"
        )
    mean_s = float(u @ state.mean)
    c = state.cov @ u
    keep = np.array(
        [2 * m + q for m in range(state.n_modes) if m != spec.mode for q in (0, 1)]
    )
    mean = state.mean[keep] + c[keep] * ((outcome - mean_s) / var)
    cov = state.cov[np.ix_(keep, keep)] - np.outer(c[keep], c[keep]) / var
    return GaussianState(mean, cov)


def apply_feedforward(
    state: GaussianState,
    rules: Iterable[FeedforwardRule],
    outcomes: Mapping[str, float],
) -> GaussianState:
    """Displace the state by every rule's outcome-weighted shift.

    All-zero outcomes are the identity. The covariance never changes;
    feed-forward is purely a mean shift once outcomes are numbers.
    """
    vec = np.zeros(2 * state.n_modes)
    for rule in rules:
        if not 0 <= rule.target_mode < state.n_modes:
            raise ValueError(
                f"feed-forward target {rule.target_mode} out of range "
                f"for {state.n_modes}-mode state"
            )
        q = 0 if rule.quadrature == "x" else 1
        vec[2 * rule.target_mode + q] += rule.shift(outcomes)
    return displace(state, Displacement(vec))


def write_trajectory_csv(path, records: Iterable[MeasurementRecord]) -> None:
    """Write detector clicks as CSV rows (trajectory_id, detector_id, theta_deg, outcome)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trajectory_id", "detector_id", "theta_deg", "outcome"])
        for rec in records:
            writer.writerow(
                [rec.trajectory_id, rec.detector_id, repr(math.degrees(rec.angle)), repr(rec.outcome)]
            )
