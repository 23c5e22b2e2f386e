"""Measurement-plan engine: deferred evaluation and trajectory sampling.

A :class:`MeasurementPlan` bundles an ordered list of homodyne steps and
the feed-forward rules that consume their outcomes. Two evaluation routes
are provided and must agree:

* :func:`run_deferred` computes the exact ensemble output state by
  replacing every outcome-dependent displacement with the corresponding
  controlled displacement gate (a symplectic map), measuring afterwards
  and discarding the measured modes. The ensemble covariance obtained
  this way equals conditional covariance plus the covariance of the
  outcome-dependent means (law of total covariance).
* :func:`derive_trajectory_model` hoists the sequential conditioning
  algebra into an affine model z -> (outcomes, output means) over i.i.d.
  standard normals, which :func:`sample_trajectories` then draws from.
  :func:`run_single_trajectory` is the literal sample / condition /
  feed-forward path used to pin the hoisted model in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from . import backends
from .errors import DegenerateMeasurementError
from .measurement import (
    DEGENERATE_VARIANCE,
    FeedforwardRule,
    HomodyneSpec,
    apply_feedforward,
    homodyne_condition,
    homodyne_sample,
)
from .states import GaussianState, SymplecticOp, apply_symplectic, discard_mode

DEFAULT_BATCHES = 20
"""Batch count for Monte-Carlo standard-error estimates."""


@dataclass(frozen=True)
class MeasurementPlan:
    """Homodyne steps (in measurement order) plus feed-forward rules.

    Step labels must be unique; feed-forward weights may only reference
    those labels, and targets must be modes that are never measured.
    """

    n_modes: int
    steps: tuple[HomodyneSpec, ...]
    feedforward: tuple[FeedforwardRule, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "feedforward", tuple(self.feedforward))
        labels = [s.label for s in self.steps]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate detector labels in {labels}")
        measured = [s.mode for s in self.steps]
        if len(set(measured)) != len(measured):
            raise ValueError("a mode can be measured at most once per plan")
        for s in self.steps:
            if not 0 <= s.mode < self.n_modes:
                raise ValueError(f"measured mode {s.mode} out of range")
        for rule in self.feedforward:
            if rule.target_mode in measured:
                raise ValueError(f"feed-forward targets measured mode {rule.target_mode}")
            if not 0 <= rule.target_mode < self.n_modes:
                raise ValueError(f"feed-forward target {rule.target_mode} out of range")
            unknown = set(rule.weights) - set(labels)
            if unknown:
                raise ValueError(f"feed-forward references unknown detectors {sorted(unknown)}")

    @property
    def measured_modes(self) -> tuple[int, ...]:
        return tuple(s.mode for s in self.steps)

    @property
    def kept_modes(self) -> tuple[int, ...]:
        measured = set(self.measured_modes)
        return tuple(m for m in range(self.n_modes) if m not in measured)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.steps)


def _controlled_shift_matrix(
    n_modes: int, spec: HomodyneSpec, rule_target: int, quadrature: str, weight: float
) -> NDArray[np.float64]:
    """Symplectic matrix of the controlled displacement q_target += w * s.

    The measured observable s = x_c cos(theta) - p_c sin(theta) is
    conserved, the target quadrature gains w * s, and the measured mode
    absorbs the conjugate back-action (which the later discard drops).
    """
    c, s = math.cos(spec.angle), math.sin(spec.angle)
    xc, pc = 2 * spec.mode, 2 * spec.mode + 1
    xt, pt = 2 * rule_target, 2 * rule_target + 1
    m = np.eye(2 * n_modes)
    if quadrature == "p":
        m[pt, xc] += weight * c
        m[pt, pc] += -weight * s
        m[xc, xt] += weight * s
        m[pc, xt] += weight * c
    else:
        m[xt, xc] += weight * c
        m[xt, pc] += -weight * s
        m[xc, pt] += -weight * s
        m[pc, pt] += -weight * c
    return m


def deferred_feedforward_op(plan: MeasurementPlan) -> SymplecticOp:
    """Product of all controlled displacement gates of the plan."""
    by_label = {s.label: s for s in plan.steps}
    total = np.eye(2 * plan.n_modes)
    for rule in plan.feedforward:
        for label, weight in rule.weights.items():
            m = _controlled_shift_matrix(
                plan.n_modes, by_label[label], rule.target_mode, rule.quadrature, weight
            )
            total = m @ total
    return SymplecticOp(total)


def run_deferred(state: GaussianState, plan: MeasurementPlan) -> GaussianState:
    """Exact ensemble output state of the plan (deterministic path)."""
    if state.n_modes != plan.n_modes:
        raise ValueError(f"plan is for {plan.n_modes} modes, state has {state.n_modes}")
    shifted = apply_symplectic(state, deferred_feedforward_op(plan))
    return discard_mode(shifted, plan.measured_modes)


@dataclass(frozen=True)
class TrajectoryModel:
    """Affine reduction of a plan over standard normals z ~ N(0, I_K).

    outcomes = g + S z (S lower triangular, sqrt of the step variances on
    the diagonal); per-trajectory output mean = b + A z; the conditional
    output covariance ``cond_cov`` is outcome independent. The ensemble
    covariance is cond_cov + A A^T.
    """

    labels: tuple[str, ...]
    angles: tuple[float, ...]
    kept_modes: tuple[int, ...]
    A: NDArray[np.float64]
    b: NDArray[np.float64]
    S: NDArray[np.float64]
    g: NDArray[np.float64]
    cond_cov: NDArray[np.float64]

    def ensemble_mean(self) -> NDArray[np.float64]:
        return self.b.copy()

    def ensemble_cov(self) -> NDArray[np.float64]:
        return self.cond_cov + self.A @ self.A.T


def derive_trajectory_model(state: GaussianState, plan: MeasurementPlan) -> TrajectoryModel:
    """Hoist the sequential conditioning algebra of a plan.

    Walks the steps in order, tracking the running mean as an affine
    function of the normals drawn so far. Conditioning leaves the mean
    offset untouched and adds c / sqrt(v) to the z-column of the step;
    the covariance update is the usual Schur complement, kept in the full
    index space so later steps need no re-indexing.
    """
    if state.n_modes != plan.n_modes:
        raise ValueError(f"plan is for {plan.n_modes} modes, state has {state.n_modes}")
    dim = 2 * plan.n_modes
    n_steps = len(plan.steps)
    cov = np.array(state.cov)
    m0 = np.array(state.mean)
    mz = np.zeros((dim, n_steps))
    s_mat = np.zeros((n_steps, n_steps))
    g_vec = np.zeros(n_steps)
    for k, spec in enumerate(plan.steps):
        u = spec.observable(plan.n_modes)
        var = float(u @ cov @ u)
        if var < DEGENERATE_VARIANCE:
            raise DegenerateMeasurementError(
                f"step {spec.label!r} observable variance {var:.3e} is degenerate"
            )
        c = cov @ u
        g_vec[k] = u @ m0
        s_mat[k, :] = u @ mz
        s_mat[k, k] = math.sqrt(var)
        mz[:, k] += c / math.sqrt(var)
        cov -= np.outer(c, c) / var
    label_row = {label: k for k, label in enumerate(plan.labels)}
    for rule in plan.feedforward:
        row = 2 * rule.target_mode + (0 if rule.quadrature == "x" else 1)
        for label, weight in rule.weights.items():
            k = label_row[label]
            m0[row] += weight * g_vec[k]
            mz[row, :] += weight * s_mat[k, :]
    keep_idx = np.array([2 * m + q for m in plan.kept_modes for q in (0, 1)])
    return TrajectoryModel(
        labels=plan.labels,
        angles=tuple(s.angle for s in plan.steps),
        kept_modes=plan.kept_modes,
        A=mz[keep_idx, :],
        b=m0[keep_idx],
        S=s_mat,
        g=g_vec,
        cond_cov=cov[np.ix_(keep_idx, keep_idx)],
    )


def run_single_trajectory(
    state: GaussianState, plan: MeasurementPlan, rng: np.random.Generator
) -> tuple[GaussianState, dict[str, float]]:
    """Literal sample > condition > feed-forward walk of one trajectory.

    Consumes exactly one standard normal per step, in step order, so it
    draws identically to the batched engines when handed the same stream.
    Returns the conditional output state (single-shot covariance) and the
    labelled outcomes.
    """
    current = state
    remaining = list(range(plan.n_modes))
    outcomes: dict[str, float] = {}
    for spec in plan.steps:
        local = HomodyneSpec(remaining.index(spec.mode), spec.angle, spec.label)
        outcome = homodyne_sample(current, local, rng)
        outcomes[spec.label] = outcome
        current = homodyne_condition(current, local, outcome)
        remaining.remove(spec.mode)
    rules = tuple(
        FeedforwardRule(remaining.index(r.target_mode), r.quadrature, r.weights)
        for r in plan.feedforward
    )
    return apply_feedforward(current, rules, outcomes), outcomes


@dataclass(frozen=True)
class MonteCarloRun:
    """Aggregate of a trajectory ensemble.

    ``cov`` is the ensemble covariance estimate cond_cov + Chat where
    Chat is the sample covariance of per-trajectory output means; its
    statistical error lives entirely in Chat, which the per-entry
    ``cov_se`` (Gaussian fourth-moment formula) and the per-batch
    ``batch_covs`` quantify.
    """

    labels: tuple[str, ...]
    angles: tuple[float, ...]
    n_trajectories: int
    seed: int
    backend: str
    mean: NDArray[np.float64]
    cov: NDArray[np.float64]
    cond_cov: NDArray[np.float64]
    mean_fluct_cov: NDArray[np.float64]
    mean_se: NDArray[np.float64]
    cov_se: NDArray[np.float64]
    batch_covs: NDArray[np.float64]
    outcomes: NDArray[np.float64] | None


def _batch_sizes(n: int, n_batches: int) -> NDArray[np.int64]:
    b = max(1, min(n_batches, n // 2)) if n > 1 else 1
    base, extra = divmod(n, b)
    return np.array([base + (1 if i < extra else 0) for i in range(b)], dtype=np.int64)


def sample_trajectories(
    model: TrajectoryModel,
    n_trajectories: int,
    seed: int,
    backend: str = "auto",
    keep_outcomes: bool = False,
    n_batches: int = DEFAULT_BATCHES,
) -> MonteCarloRun:
    """Draw an ensemble of trajectories from per-trajectory PCG64 streams.

    Trajectory i uses the i-th child of SeedSequence(seed), so results do
    not depend on the backend's internal chunking and any trajectory can
    be reproduced in isolation.
    """
    if n_trajectories < 2:
        raise ValueError("need at least 2 trajectories for covariance estimates")
    children = np.random.SeedSequence(seed).spawn(n_trajectories)
    bitgens = [np.random.PCG64(c) for c in children]
    runner, backend_name = backends.select_backend(backend)
    sizes = _batch_sizes(n_trajectories, n_batches)
    batch_sum, batch_outer, outcomes = runner(
        bitgens,
        np.ascontiguousarray(model.A),
        np.ascontiguousarray(model.b),
        np.ascontiguousarray(model.S),
        np.ascontiguousarray(model.g),
        sizes,
        keep_outcomes,
    )
    n = n_trajectories
    total_sum = batch_sum.sum(axis=0)
    total_outer = batch_outer.sum(axis=0)
    mean = total_sum / n
    fluct = (total_outer - n * np.outer(mean, mean)) / (n - 1)
    fluct = 0.5 * (fluct + fluct.T)
    cov = model.cond_cov + fluct
    diag = np.clip(np.diag(fluct), 0.0, None)
    cov_se = np.sqrt((np.outer(diag, diag) + fluct**2) / (n - 1))
    mean_se = np.sqrt(diag / n)
    batch_covs = np.empty((len(sizes), *fluct.shape))
    for i, nb in enumerate(sizes):
        mb = batch_sum[i] / nb
        cb = (batch_outer[i] - nb * np.outer(mb, mb)) / max(nb - 1, 1)
        batch_covs[i] = model.cond_cov + 0.5 * (cb + cb.T)
    return MonteCarloRun(
        labels=model.labels,
        angles=model.angles,
        n_trajectories=n,
        seed=seed,
        backend=backend_name,
        mean=mean,
        cov=cov,
        cond_cov=model.cond_cov.copy(),
        mean_fluct_cov=fluct,
        mean_se=mean_se,
        cov_se=cov_se,
        batch_covs=batch_covs,
        outcomes=outcomes,
    )
