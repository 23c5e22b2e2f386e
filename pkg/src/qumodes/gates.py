"""Symplectic gate factories and the loss channel.

Every factory returns a :class:`~qumodes.states.SymplecticOp` acting on a
full n-mode register; the target modes are given by index. Determinants
are one and M Omega M^T = Omega holds by construction (and is re-checked
by the SymplecticOp constructor).
"""

from __future__ import annotations

import math
from collections.abc import Iterable

import numpy as np
from numpy.typing import NDArray

from .states import GaussianState, SymplecticOp
from .units import VACUUM_VARIANCE


def _embed(n_modes: int, modes: tuple[int, ...], small: NDArray[np.float64]) -> NDArray[np.float64]:
    """Place a 2k x 2k block acting on ``modes`` into a 2n x 2n identity."""
    if len(set(modes)) != len(modes):
        raise ValueError(f"target modes must be distinct, got {modes}")
    for m in modes:
        if not 0 <= m < n_modes:
            raise ValueError(f"mode {m} out of range for {n_modes} modes")
    full = np.eye(2 * n_modes)
    idx = np.array([2 * m + q for m in modes for q in (0, 1)])
    full[np.ix_(idx, idx)] = small
    return full


def squeezer(n_modes: int, mode: int, z: float) -> SymplecticOp:
    """Single-mode squeezer: x -> z x, p -> p / z.

    ``z = e^r`` squeezes p below shot noise; z = sqrt(2) gives the fixed
    +3.0 dB / -3.0 dB rescale of the measurement-based gate outputs.
    """
    if z <= 0.0:
        raise ValueError(f"squeezer parameter must be positive, got {z}")
    return SymplecticOp(_embed(n_modes, (mode,), np.diag([z, 1.0 / z])))


def rotation(n_modes: int, mode: int, angle: float) -> SymplecticOp:
    """Phase-space rotation: x -> x cos + p sin, p -> -x sin + p cos.

    angle = pi/2 is the Fourier gate (x -> p, p -> -x). Applying the
    rotation with ``-angle`` and then measuring x realizes a homodyne
    measurement of x cos(angle) - p sin(angle).
    """
    c, s = math.cos(angle), math.sin(angle)
    return SymplecticOp(_embed(n_modes, (mode,), np.array([[c, s], [-s, c]])))


def beamsplitter(n_modes: int, mode_a: int, mode_b: int, reflectivity: float) -> SymplecticOp:
    """Phase-free beamsplitter acting identically on x and p.

    out_a = sqrt(1-R) in_a - sqrt(R) in_b
    out_b = sqrt(R) in_a + sqrt(1-R) in_b

    The minus sign sits on the first output arm, which is the measured
    arm in the input couplers of the teleportation circuit.
    """
    if not 0.0 <= reflectivity <= 1.0:
        raise ValueError(f"reflectivity must lie in [0, 1], got {reflectivity}")
    t, r = math.sqrt(1.0 - reflectivity), math.sqrt(reflectivity)
    small = np.array(
        [
            [t, 0.0, -r, 0.0],
            [0.0, t, 0.0, -r],
            [r, 0.0, t, 0.0],
            [0.0, r, 0.0, t],
        ]
    )
    return SymplecticOp(_embed(n_modes, (mode_a, mode_b), small))


def controlled_z(n_modes: int, mode_a: int, mode_b: int, gain: float) -> SymplecticOp:
    """Two-mode controlled-Z: p_a += g x_b and p_b += g x_a."""
    small = np.eye(4)
    small[1, 2] = gain
    small[3, 0] = gain
    return SymplecticOp(_embed(n_modes, (mode_a, mode_b), small))


def quadratic_phase(n_modes: int, mode: int, strength: float) -> SymplecticOp:
    """Single-mode shear: p += t x."""
    small = np.eye(2)
    small[1, 0] = strength
    return SymplecticOp(_embed(n_modes, (mode,), small))


def tunable_entangler(n_modes: int, mode_a: int, mode_b: int, strength: float) -> SymplecticOp:
    """The tuneable two-mode entangling gate: p_j += t (x_a + x_b) on both modes.

    Decomposes exactly as quadratic_phase(a, t) * quadratic_phase(b, t) *
    controlled_z(a, b, t); strength t = tan(theta) of the tuning angle.
    """
    small = np.eye(4)
    small[1, 0] += strength
    small[1, 2] += strength
    small[3, 0] += strength
    small[3, 2] += strength
    return SymplecticOp(_embed(n_modes, (mode_a, mode_b), small))


def passive_network(unitary: NDArray[np.complex128], n_modes: int | None = None) -> SymplecticOp:
    """Quadrature representation of a passive (photon-number preserving) network.

    For the k x k mode unitary U = R + iJ the quadratures map as
    x' = R x - J p, p' = J x + R p. A non-unitary argument raises, since
    the resulting matrix would not be symplectic.
    """
    u = np.asarray(unitary, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"network unitary must be square, got {u.shape}")
    k = u.shape[0]
    if n_modes is None:
        n_modes = k
    elif n_modes != k:
        raise ValueError("embedding a partial network is not supported; pass the full unitary")
    re, im = u.real, u.imag
    m = np.zeros((2 * k, 2 * k))
    m[0::2, 0::2] = re
    m[0::2, 1::2] = -im
    m[1::2, 0::2] = im
    m[1::2, 1::2] = re
    return SymplecticOp(m)


def loss_channel(
    state: GaussianState, mode: int | Iterable[int], transmission: float
) -> GaussianState:
    """Pure-loss channel with transmission eta on the given mode(s).

    mean -> sqrt(eta) mean on the lossy modes; the lossy diagonal blocks
    become eta B + (1 - eta)/4 I and cross blocks scale by sqrt(eta).
    eta = 1 is the identity, eta = 0 replaces the mode by vacuum.
    """
    if not 0.0 <= transmission <= 1.0:
        raise ValueError(f"transmission must lie in [0, 1], got {transmission}")
    modes = {mode} if isinstance(mode, (int, np.integer)) else set(int(m) for m in mode)
    for m in modes:
        if not 0 <= m < state.n_modes:
            raise ValueError(f"mode {m} out of range for {state.n_modes}-mode state")
    scale = np.ones(2 * state.n_modes)
    for m in modes:
        scale[2 * m] = scale[2 * m + 1] = math.sqrt(transmission)
    noise = np.zeros(2 * state.n_modes)
    for m in modes:
        noise[2 * m] = noise[2 * m + 1] = (1.0 - transmission) * VACUUM_VARIANCE
    cov = state.cov * np.outer(scale, scale) + np.diag(noise)
    return GaussianState(state.mean * scale, cov)
