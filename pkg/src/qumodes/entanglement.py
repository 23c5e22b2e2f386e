"""Two-mode entanglement witness: partial transpose and log-negativity.

For a two-mode Gaussian state the positive-partial-transpose test is
necessary and sufficient. Transposing one mode flips the sign of its p
quadrature; the state is entangled iff the smallest symplectic
eigenvalue of the transposed covariance drops below the vacuum value
1/4, and the logarithmic negativity is E_N = max(0, -ln(4 lambda_-)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .states import GaussianState, symplectic_eigenvalues
from .units import VACUUM_VARIANCE

SEPARABLE_TOL = 1e-9
"""Margin below 1/4 required before a state is called entangled."""

ABSTAIN_SIGMAS = 3.0
"""A sampled lambda_- within this many standard errors of 1/4 is inconclusive."""


def _as_cov(state_or_cov: GaussianState | NDArray[np.float64]) -> NDArray[np.float64]:
    if isinstance(state_or_cov, GaussianState):
        return state_or_cov.cov
    cov = np.asarray(state_or_cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
        raise ValueError(f"covariance must be square and even-sized, got {cov.shape}")
    return cov


def partial_transpose(
    state_or_cov: GaussianState | NDArray[np.float64], mode: int = 1
) -> NDArray[np.float64]:
    """Covariance of the partial transpose (p sign flipped on one mode)."""
    cov = _as_cov(state_or_cov)
    n = cov.shape[0] // 2
    if not 0 <= mode < n:
        raise ValueError(f"mode {mode} out of range for {n} modes")
    signs = np.ones(2 * n)
    signs[2 * mode + 1] = -1.0
    return cov * np.outer(signs, signs)


def minimum_pt_eigenvalue(state_or_cov: GaussianState | NDArray[np.float64]) -> float:
    """Smallest symplectic eigenvalue of the partially transposed covariance.

    Requires a two-mode state; which mode is transposed does not affect
    the spectrum.
    """
    cov = _as_cov(state_or_cov)
    if cov.shape[0] != 4:
        raise ValueError(f"PPT witness needs a two-mode state, got shape {cov.shape}")
    if np.linalg.eigvalsh(0.5 * (cov + cov.T)).min() <= 0.0:
        raise ValueError("covariance matrix is not positive definite")
    return float(symplectic_eigenvalues(partial_transpose(cov, 1))[0])


def minimum_pt_eigenvalue_determinant(
    state_or_cov: GaussianState | NDArray[np.float64],
) -> float:
    """Same quantity through the 2x2-block determinant invariants.

    With cov = [[A, C], [C^T, B]], the transposed state has invariant
    delta = det A + det B - 2 det C and

        lambda_-^2 = (delta - sqrt(delta^2 - 4 det cov)) / 2.

    Kept as an independent cross-check of the eigensolver route.
    """
    cov = _as_cov(state_or_cov)
    if cov.shape[0] != 4:
        raise ValueError(f"PPT witness needs a two-mode state, got shape {cov.shape}")
    a = np.linalg.det(cov[:2, :2])
    b = np.linalg.det(cov[2:, 2:])
    c = np.linalg.det(cov[:2, 2:])
    delta = a + b - 2.0 * c
    disc = delta * delta - 4.0 * np.linalg.det(cov)
    lam_sq = (delta - np.sqrt(max(disc, 0.0))) / 2.0
    return float(np.sqrt(max(lam_sq, 0.0)))


@dataclass(frozen=True)
class EntanglementVerdict:
    """PPT witness result, with an optional sampling abstention.

    ``confident`` is False when a standard error was supplied and the
    estimate sits within :data:`ABSTAIN_SIGMAS` standard errors of the
    1/4 boundary; the boolean ``entangled`` is then not trustworthy.
    """

    lambda_minus: float
    log_negativity: float
    entangled: bool
    lambda_se: float | None = None
    confident: bool = True


def verdict(
    state_or_cov: GaussianState | NDArray[np.float64],
    lambda_se: float | None = None,
) -> EntanglementVerdict:
    """Evaluate the PPT witness on a two-mode covariance."""
    lam = minimum_pt_eigenvalue(state_or_cov)
    log_neg = max(0.0, -float(np.log(4.0 * lam)))
    entangled = lam < VACUUM_VARIANCE - SEPARABLE_TOL
    confident = True
    if lambda_se is not None and lambda_se > 0.0:
        confident = abs(lam - VACUUM_VARIANCE) >= ABSTAIN_SIGMAS * lambda_se
    return EntanglementVerdict(
        lambda_minus=lam,
        log_negativity=log_neg,
        entangled=entangled,
        lambda_se=lambda_se,
        confident=confident,
    )
