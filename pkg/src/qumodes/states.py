"""Gaussian states of optical modes and the maps that act on them.

Conventions
-----------
hbar = 1/2. Quadratures are interleaved as (x1, p1, x2, p2, ...). The
vacuum covariance is I/4. Commutation is encoded by the block-diagonal
form Omega = diag([[0, -1], [1, 0]], ...); a matrix M is symplectic when
M Omega M^T = Omega, and a covariance matrix V describes a physical state
exactly when V + (i/4) Omega >= 0, equivalently when every symplectic
eigenvalue of V is at least 1/4.
"""

from __future__ import annotations

import json
from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import UnphysicalStateError
from .units import VACUUM_VARIANCE

SYMMETRY_TOL = 1e-10
"""Maximum allowed asymmetry |V - V^T| of a covariance matrix."""

SYMPLECTIC_TOL = 1e-10
"""Maximum allowed violation of M Omega M^T = Omega."""

PHYSICALITY_SLACK = 1e-9
"""Numerical slack below 1/4 tolerated for symplectic eigenvalues."""


def symplectic_form(n_modes: int) -> NDArray[np.float64]:
    """The commutation form Omega for ``n_modes`` modes, interleaved order."""
    block = np.array([[0.0, -1.0], [1.0, 0.0]])
    out = np.zeros((2 * n_modes, 2 * n_modes))
    for j in range(n_modes):
        out[2 * j : 2 * j + 2, 2 * j : 2 * j + 2] = block
    return out


def symplectic_eigenvalues(cov: NDArray[np.float64]) -> NDArray[np.float64]:
    """Symplectic spectrum of a covariance matrix.

    Returns the n positive doubled eigenvalues |eig(i Omega V)|, sorted
    ascending. For a physical state every entry is >= 1/4, with equality
    on pure directions.
    """
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
        raise ValueError(f"covariance must be square with even size, got {cov.shape}")
    n = cov.shape[0] // 2
    ev = np.linalg.eigvals(1j * symplectic_form(n) @ cov)
    mags = np.sort(np.abs(ev))
    # eigenvalues come in +/- pairs of equal magnitude; keep one per pair
    return mags[::2]


def _as_readonly(arr: NDArray[np.float64]) -> NDArray[np.float64]:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Immutable Gaussian state: mean quadrature vector plus covariance.

    Parameters
    ----------
    mean:
        Length 2n vector of quadrature means, interleaved (x1, p1, ...).
    cov:
        2n x 2n covariance matrix. Validated for symmetry (1e-10) and for
        physicality (symplectic eigenvalues >= 1/4 - 1e-9) on construction;
        violations raise :class:`UnphysicalStateError`.
    """

    mean: NDArray[np.float64]
    cov: NDArray[np.float64]

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.asarray(self.cov, dtype=float)
        if mean.size == 0 or mean.size % 2:
            raise ValueError(f"mean must have even positive length, got {mean.size}")
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"cov shape {cov.shape} does not match mean length {mean.size}")
        asym = np.abs(cov - cov.T).max()
        if asym > SYMMETRY_TOL:
            raise UnphysicalStateError(f"covariance asymmetry {asym:.3e} exceeds {SYMMETRY_TOL}")
        cov = 0.5 * (cov + cov.T)
        lam_min = float(symplectic_eigenvalues(cov).min())
        if lam_min < VACUUM_VARIANCE - PHYSICALITY_SLACK:
            raise UnphysicalStateError(
                f"minimal symplectic eigenvalue {lam_min:.12f} is below 1/4"
            )
        object.__setattr__(self, "mean", _as_readonly(mean))
        object.__setattr__(self, "cov", _as_readonly(cov))

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    def to_dict(self) -> dict:
        """Serializable form: {n_modes, mean, cov} with row-major cov."""
        return {
            "n_modes": self.n_modes,
            "mean": self.mean.tolist(),
            "cov": self.cov.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GaussianState":
        state = cls(np.asarray(data["mean"]), np.asarray(data["cov"]))
        if int(data.get("n_modes", state.n_modes)) != state.n_modes:
            raise ValueError("n_modes field inconsistent with mean length")
        return state

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "GaussianState":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class SymplecticOp:
    """A validated symplectic matrix acting on quadrature space."""

    matrix: NDArray[np.float64]

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise ValueError(f"symplectic matrix must be square even-sized, got {m.shape}")
        omega = symplectic_form(m.shape[0] // 2)
        err = np.abs(m @ omega @ m.T - omega).max()
        if err > SYMPLECTIC_TOL:
            raise ValueError(f"matrix violates M Omega M^T = Omega by {err:.3e}")
        object.__setattr__(self, "matrix", _as_readonly(m))

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    def then(self, other: "SymplecticOp") -> "SymplecticOp":
        """Composition: apply ``self`` first, then ``other``."""
        return SymplecticOp(other.matrix @ self.matrix)


@dataclass(frozen=True)
class Displacement:
    """Phase-space shift, a length 2n vector added to the mean."""

    vector: NDArray[np.float64] = field()

    def __post_init__(self) -> None:
        v = np.asarray(self.vector, dtype=float).reshape(-1)
        if v.size % 2:
            raise ValueError("displacement vector must have even length")
        object.__setattr__(self, "vector", _as_readonly(v))

    @classmethod
    def single(cls, n_modes: int, mode: int, dx: float = 0.0, dp: float = 0.0) -> "Displacement":
        """Shift one mode by (dx, dp), all other modes untouched."""
        if not 0 <= mode < n_modes:
            raise ValueError(f"mode {mode} out of range for {n_modes} modes")
        v = np.zeros(2 * n_modes)
        v[2 * mode] = dx
        v[2 * mode + 1] = dp
        return cls(v)


def vacuum(n_modes: int) -> GaussianState:
    """The n-mode vacuum: zero mean, covariance I/4."""
    if n_modes < 1:
        raise ValueError(f"n_modes must be positive, got {n_modes}")
    return GaussianState(np.zeros(2 * n_modes), VACUUM_VARIANCE * np.eye(2 * n_modes))


def apply_symplectic(state: GaussianState, op: SymplecticOp) -> GaussianState:
    """Evolve a state under a symplectic map: mean -> Mm, cov -> MVM^T."""
    if op.n_modes != state.n_modes:
        raise ValueError(f"operator on {op.n_modes} modes applied to {state.n_modes}-mode state")
    m = op.matrix
    return GaussianState(m @ state.mean, m @ state.cov @ m.T)


def displace(state: GaussianState, shift: Displacement | NDArray[np.float64]) -> GaussianState:
    """Shift the mean; the covariance is untouched."""
    vec = shift.vector if isinstance(shift, Displacement) else np.asarray(shift, dtype=float)
    if vec.size != 2 * state.n_modes:
        raise ValueError("displacement length does not match state")
    return GaussianState(state.mean + vec, state.cov)


def tensor(a: GaussianState, b: GaussianState) -> GaussianState:
    """Product state with the modes of ``a`` first."""
    na, nb = 2 * a.n_modes, 2 * b.n_modes
    cov = np.zeros((na + nb, na + nb))
    cov[:na, :na] = a.cov
    cov[na:, na:] = b.cov
    return GaussianState(np.concatenate([a.mean, b.mean]), cov)


def discard_mode(state: GaussianState, mode: int | Iterable[int]) -> GaussianState:
    """Partial trace over one mode (or several), keeping the rest in order."""
    drop = {mode} if isinstance(mode, (int, np.integer)) else set(int(m) for m in mode)
    for m in drop:
        if not 0 <= m < state.n_modes:
            raise ValueError(f"mode {m} out of range for {state.n_modes}-mode state")
    keep = [m for m in range(state.n_modes) if m not in drop]
    if not keep:
        raise ValueError("cannot discard every mode")
    idx = np.array([2 * m + q for m in keep for q in (0, 1)])
    return GaussianState(state.mean[idx], state.cov[np.ix_(idx, idx)])


def check_physicality(state: GaussianState) -> tuple[bool, float]:
    """Uncertainty-bound check.

    Returns
    -------
    (ok, lam_min):
        ``ok`` is True when the minimal symplectic eigenvalue ``lam_min``
        is at least 1/4 up to the standard slack. Constructed states always
        pass; the function exists to re-verify after raw-matrix math.
    """
    lam_min = float(symplectic_eigenvalues(state.cov).min())
    return lam_min >= VACUUM_VARIANCE - PHYSICALITY_SLACK, lam_min
