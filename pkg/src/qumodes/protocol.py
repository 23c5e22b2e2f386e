"""Tuneable entangling gate on two inputs via a three-node cluster.

Circuit layout, five modes in order (alpha, c1, c2, c3, beta):

* the inputs alpha and beta are coupled to the cluster end nodes on
  balanced beamsplitters (the difference arm keeps the input slot),
* homodyne detectors read x on both difference arms (s1, s3) and the
  rotated quadrature s(theta) on the middle node (s2),
* outcome displacements steer the two surviving modes mu (from c1) and
  nu (from c3).

The net effect on the input pair is the two-mode gate

    (x, p)_each -> sqrt(2)-squeezer after p_j += tan(theta) (x_a + x_b),

plus additive noise on the p quadratures inherited from the finite
cluster squeezing. :func:`analytic_output` evaluates that model directly
and :func:`lambda_minus_closed_form` the resulting entanglement witness,
both serving as independent oracles for the simulated pipeline.
"""

from __future__ import annotations

import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import NDArray

from .cluster import ResourceNoiseModel, make_linear_cluster3
from .entanglement import EntanglementVerdict, minimum_pt_eigenvalue, verdict
from .gates import beamsplitter, loss_channel, squeezer, tunable_entangler
from .measurement import FeedforwardRule, HomodyneSpec, MeasurementRecord
from .simulate import (
    MeasurementPlan,
    MonteCarloRun,
    derive_trajectory_model,
    run_deferred,
    sample_trajectories,
)
from .states import Displacement, GaussianState, apply_symplectic, displace, tensor, vacuum
from .units import VACUUM_VARIANCE

OUTPUT_LABELS = ("x_mu", "p_mu", "x_nu", "p_nu")
"""Quadrature order of the two-mode output state."""

_MODE_ALPHA, _MODE_C1, _MODE_C2, _MODE_C3, _MODE_BETA = range(5)


def _normalize_triplet(value, name: str) -> tuple[float, float, float]:
    if isinstance(value, (int, float)):
        return (float(value),) * 3
    out = tuple(float(v) for v in value)
    if len(out) != 3:
        raise ValueError(f"{name} takes one value or three, got {len(out)}")
    return out


@dataclass(frozen=True)
class ProtocolConfig:
    """Full scenario description for one gate evaluation.

    Parameters
    ----------
    theta:
        Middle-detector angle in radians, strictly inside (-pi/2, pi/2);
        the gate strength is tan(theta).
    squeezing_r:
        Resource squeezing, one value for all three cluster modes or one
        per mode.
    alpha_mean / beta_mean:
        Input coherent amplitudes (x, p); (0, 0) is vacuum.
    loss:
        Optional transmission of a pure loss channel on each cluster
        mode (1 = lossless), scalar or per mode. Inputs stay lossless.
    mode:
        "deterministic" evaluates the exact ensemble output;
        "mc" samples ``n_trajectories`` outcome trajectories.
    """

    theta: float
    squeezing_r: float | tuple[float, float, float]
    alpha_mean: tuple[float, float] = (0.0, 0.0)
    beta_mean: tuple[float, float] = (0.0, 0.0)
    loss: float | tuple[float, float, float] | None = None
    mode: str = "deterministic"
    n_trajectories: int = 100_000
    seed: int = 0
    backend: str = "auto"
    keep_trajectories: bool = False

    def __post_init__(self) -> None:
        if not math.isfinite(self.theta) or not -math.pi / 2 < self.theta < math.pi / 2:
            raise ValueError(f"theta must lie strictly inside (-pi/2, pi/2), got {self.theta}")
        object.__setattr__(self, "squeezing_r", _normalize_triplet(self.squeezing_r, "squeezing_r"))
        for r in self.squeezing_r:
            if r < 0.0:
                raise ValueError(f"squeezing_r must be non-negative, got {r}")
        object.__setattr__(self, "alpha_mean", tuple(float(v) for v in self.alpha_mean))
        object.__setattr__(self, "beta_mean", tuple(float(v) for v in self.beta_mean))
        if len(self.alpha_mean) != 2 or len(self.beta_mean) != 2:
            raise ValueError("input means are (x, p) pairs")
        if self.loss is not None:
            eta = _normalize_triplet(self.loss, "loss")
            for v in eta:
                if not 0.0 <= v <= 1.0:
                    raise ValueError(f"loss transmission must lie in [0, 1], got {v}")
            object.__setattr__(self, "loss", eta)
        mode = {"det": "deterministic"}.get(self.mode, self.mode)
        if mode not in ("deterministic", "mc"):
            raise ValueError(f"mode must be 'deterministic' (or 'det') or 'mc', got {self.mode!r}")
        object.__setattr__(self, "mode", mode)
        if self.mode == "mc" and self.n_trajectories < 2:
            raise ValueError("mc mode needs at least 2 trajectories")

    @property
    def gain(self) -> float:
        """Gate strength t = tan(theta)."""
        return math.tan(self.theta)


def prepare_premeasurement_state(config: ProtocolConfig) -> GaussianState:
    """Inputs and cluster tensored, loss applied, couplers applied.

    Mode order (alpha-arm, c1, c2, c3, beta-arm); after the balanced
    beamsplitters the alpha/beta slots hold the difference arms that the
    x detectors read.
    """
    alpha = displace(vacuum(1), Displacement(np.array(config.alpha_mean)))
    beta = displace(vacuum(1), Displacement(np.array(config.beta_mean)))
    state = tensor(tensor(alpha, make_linear_cluster3(config.squeezing_r)), beta)
    if config.loss is not None:
        for offset, eta in enumerate(config.loss):
            state = loss_channel(state, _MODE_C1 + offset, eta)
    state = apply_symplectic(state, beamsplitter(5, _MODE_ALPHA, _MODE_C1, 0.5))
    return apply_symplectic(state, beamsplitter(5, _MODE_BETA, _MODE_C3, 0.5))


def measurement_plan(config: ProtocolConfig) -> MeasurementPlan:
    """The three detectors and four outcome displacements of the gate.

    Measurement order s1 (x, alpha arm), s3 (x, beta arm), s2 (rotated,
    middle node). Both outputs receive p shifts t*(s1 + s3) and
    -s2 / (sqrt(2) cos(theta)); each output additionally absorbs its own
    coupler outcome as an x shift.
    """
    t = config.gain
    c2_weight = -1.0 / (math.sqrt(2.0) * math.cos(config.theta))
    p_weights = {"s1": t, "s3": t, "s2": c2_weight}
    return MeasurementPlan(
        n_modes=5,
        steps=(
            HomodyneSpec(_MODE_ALPHA, 0.0, "s1"),
            HomodyneSpec(_MODE_BETA, 0.0, "s3"),
            HomodyneSpec(_MODE_C2, config.theta, "s2"),
        ),
        feedforward=(
            FeedforwardRule(_MODE_C1, "x", {"s1": 1.0}),
            FeedforwardRule(_MODE_C1, "p", p_weights),
            FeedforwardRule(_MODE_C3, "x", {"s3": 1.0}),
            FeedforwardRule(_MODE_C3, "p", p_weights),
        ),
    )


def transfer_matrix(gain: float) -> NDArray[np.float64]:
    """Ideal 4x4 action of the gate on (x_a, p_a, x_b, p_b).

    The entangling shear p_j += gain * (x_a + x_b) followed by a
    sqrt(2) squeezer on each mode; all outcome terms cancel in the mean
    by construction, so coherent amplitudes propagate exactly through
    this matrix regardless of resource squeezing.
    """
    op = (
        tunable_entangler(2, 0, 1, gain)
        .then(squeezer(2, 0, math.sqrt(2.0)))
        .then(squeezer(2, 1, math.sqrt(2.0)))
    )
    return np.asarray(op.matrix)


@dataclass(frozen=True)
class AnalyticOutput:
    """Closed-form model of the lossless gate output.

    cov = M V_in M^T + noise with M the ideal transfer matrix and
    ``noise`` the additive p-quadrature contribution of the cluster's
    nullifier fluctuations.
    """

    matrix: NDArray[np.float64]
    noise: NDArray[np.float64]
    state: GaussianState
    lambda_minus: float
    log_negativity: float


def added_noise_matrix(noise_model: ResourceNoiseModel, gain: float) -> NDArray[np.float64]:
    """Additive output covariance from finite resource squeezing.

    Only p rows are touched: each output p carries (its own end-node
    nullifier + gain * middle nullifier) / sqrt(2).
    """
    t = gain
    n = np.zeros((4, 4))
    n[1, 1] = (noise_model.var_delta1 + t * t * noise_model.var_delta2) / 2.0
    n[3, 3] = (noise_model.var_delta3 + t * t * noise_model.var_delta2) / 2.0
    n[1, 3] = n[3, 1] = (noise_model.cov_delta13 + t * t * noise_model.var_delta2) / 2.0
    return n


def analytic_output(
    config: ProtocolConfig,
    e2r: float | Sequence[float] | None = None,
) -> AnalyticOutput:
    """Evaluate the closed-form output model (lossless circuits only).

    ``e2r`` overrides the squeezed-variance suppression factors of the
    config, e.g. 0.0 for the infinite-squeezing ideal gate.
    """
    if config.loss is not None:
        raise ValueError("the analytic model assumes lossless cluster paths")
    if e2r is None:
        factors = tuple(math.exp(-2.0 * r) for r in config.squeezing_r)
    else:
        factors = _normalize_triplet(e2r, "e2r")
        for v in factors:
            if v < 0.0:
                raise ValueError(f"e2r must be non-negative, got {v}")
    m = transfer_matrix(config.gain)
    noise = added_noise_matrix(ResourceNoiseModel(factors), config.gain)
    mean_in = np.array([*config.alpha_mean, *config.beta_mean])
    cov = m @ (VACUUM_VARIANCE * np.eye(4)) @ m.T + noise
    state = GaussianState(m @ mean_in, cov)
    lam = minimum_pt_eigenvalue(state.cov)
    return AnalyticOutput(
        matrix=m,
        noise=noise,
        state=state,
        lambda_minus=lam,
        log_negativity=max(0.0, -math.log(4.0 * lam)),
    )


def lambda_minus_closed_form(gain: float, e2r: float) -> float:
    """Smaller PT symplectic eigenvalue of the gate output, closed form.

    Valid for equal resource squeezing e2r = e^{-2r} on all three cluster
    modes and lossless paths; e2r = 0 is the ideal gate, e2r = 1 no
    squeezing at all. The output pair is entangled iff the value drops
    below 1/4.
    """
    if e2r < 0.0:
        raise ValueError(f"e2r must be non-negative, got {e2r}")
    t2 = gain * gain
    outer = 1.0 + 2.0 * t2 + (2.0 + 3.0 * t2) * e2r
    inner = 4.0 * t2 * (1.0 + t2 + (2.0 + 3.0 * t2) * e2r) + ((1.0 + 3.0 * t2) * e2r) ** 2
    return 0.25 * math.sqrt(outer - math.sqrt(max(inner, 0.0)))


def _batch_lambda_se(run: MonteCarloRun) -> float | None:
    """Standard error of lambda_minus from per-batch covariance estimates."""
    n_batches = run.batch_covs.shape[0]
    if n_batches < 2:
        return None
    lams = np.array([minimum_pt_eigenvalue(c) for c in run.batch_covs])
    return float(lams.std(ddof=1) / math.sqrt(n_batches))


@dataclass(frozen=True)
class ProtocolResult:
    """Output state of one gate evaluation plus derived summaries."""

    config: ProtocolConfig
    output: GaussianState
    verdict: EntanglementVerdict
    mc: MonteCarloRun | None = None

    @property
    def lambda_minus(self) -> float:
        return self.verdict.lambda_minus

    @property
    def log_negativity(self) -> float:
        return self.verdict.log_negativity

    @property
    def entangled(self) -> bool:
        return self.verdict.entangled

    def variances(self) -> dict[str, float]:
        return {k: float(self.output.cov[i, i]) for i, k in enumerate(OUTPUT_LABELS)}

    def means(self) -> dict[str, float]:
        return {k: float(self.output.mean[i]) for i, k in enumerate(OUTPUT_LABELS)}

    def variances_db(self) -> dict[str, float]:
        return {
            k: 10.0 * math.log10(v / VACUUM_VARIANCE) for k, v in self.variances().items()
        }

    def power_db(self) -> dict[str, float]:
        """Total power (mean squared plus variance) per quadrature, in dB."""
        means = self.means()
        return {
            k: 10.0 * math.log10((means[k] ** 2 + v) / VACUUM_VARIANCE)
            for k, v in self.variances().items()
        }

    def excess_noise(self) -> NDArray[np.float64]:
        """Output covariance minus the ideal-gate covariance.

        For lossless runs this equals the resource-noise model
        :func:`added_noise_matrix`; with loss it additionally reflects
        the admixed vacuum, so it stays an honest empirical quantity.
        """
        m = transfer_matrix(self.config.gain)
        return np.asarray(self.output.cov) - m @ (VACUUM_VARIANCE * np.eye(4)) @ m.T

    def iter_trajectory_records(self) -> Iterator[MeasurementRecord]:
        """Detector clicks of a stored Monte-Carlo run, row by row."""
        if self.mc is None or self.mc.outcomes is None:
            raise ValueError(
                "no stored trajectories; run with mode='mc' and keep_trajectories=True"
            )
        for i, row in enumerate(self.mc.outcomes):
            for k, label in enumerate(self.mc.labels):
                yield MeasurementRecord(i, label, self.mc.angles[k], float(row[k]))

    def to_dict(self) -> dict:
        """Flat serializable summary (states as nested dicts)."""
        out = {
            "theta": self.config.theta,
            "t": self.config.gain,
            "mode": self.config.mode,
            "lambda_minus": self.lambda_minus,
            "log_negativity": self.log_negativity,
            "entangled": self.entangled,
            "lambda_se": self.verdict.lambda_se,
            "verdict_confident": self.verdict.confident,
            "means": self.means(),
            "variances": self.variances(),
            "variances_db": self.variances_db(),
            "output": self.output.to_dict(),
        }
        if self.mc is not None:
            out["n_trajectories"] = self.mc.n_trajectories
            out["seed"] = self.mc.seed
            out["backend"] = self.mc.backend
        return out


def run_protocol(config: ProtocolConfig) -> ProtocolResult:
    """Evaluate the gate end to end under the configured mode."""
    state = prepare_premeasurement_state(config)
    plan = measurement_plan(config)
    if config.mode == "deterministic":
        output = run_deferred(state, plan)
        return ProtocolResult(config=config, output=output, verdict=verdict(output.cov))
    model = derive_trajectory_model(state, plan)
    run = sample_trajectories(
        model,
        config.n_trajectories,
        config.seed,
        backend=config.backend,
        keep_outcomes=config.keep_trajectories,
    )
    output = GaussianState(run.mean, run.cov)
    lam_se = _batch_lambda_se(run)
    return ProtocolResult(
        config=config,
        output=output,
        verdict=verdict(output.cov, lambda_se=lam_se),
        mc=run,
    )


@dataclass(frozen=True)
class PathComparison:
    """Cross-validation of the evaluation routes for one config.

    The deterministic route always runs. The analytic model joins when
    the circuit is lossless; a Monte-Carlo route joins when the config
    asks for mode="mc". Deviations against the analytic model are
    absolute; Monte-Carlo deviations are in units of the estimated
    standard error.
    """

    deterministic: ProtocolResult
    analytic: AnalyticOutput | None
    monte_carlo: ProtocolResult | None
    max_cov_error: float | None
    max_mean_error: float | None
    lambda_error: float | None
    max_cov_sigma: float | None
    max_mean_sigma: float | None

    def ok(self, tol: float = 1e-9, sigmas: float = 5.0) -> bool:
        checks = []
        if self.max_cov_error is not None:
            checks += [self.max_cov_error < tol, self.max_mean_error < tol, self.lambda_error < tol]
        if self.max_cov_sigma is not None:
            checks += [self.max_cov_sigma < sigmas, self.max_mean_sigma < sigmas]
        return bool(checks) and all(checks)


def compare_paths(config: ProtocolConfig) -> PathComparison:
    """Run every applicable route for ``config`` and diff the outputs."""
    det = run_protocol(replace(config, mode="deterministic"))
    analytic = None
    max_cov_error = max_mean_error = lambda_error = None
    if config.loss is None:
        analytic = analytic_output(config)
        max_cov_error = float(np.abs(det.output.cov - analytic.state.cov).max())
        max_mean_error = float(np.abs(det.output.mean - analytic.state.mean).max())
        lambda_error = abs(det.lambda_minus - analytic.lambda_minus)
    mc = None
    max_cov_sigma = max_mean_sigma = None
    if config.mode == "mc":
        mc = run_protocol(config)
        tiny = np.finfo(float).tiny
        cov_dev = np.abs(mc.output.cov - det.output.cov)
        mean_dev = np.abs(mc.output.mean - det.output.mean)
        max_cov_sigma = float((cov_dev / np.maximum(mc.mc.cov_se, tiny)).max())
        max_mean_sigma = float((mean_dev / np.maximum(mc.mc.mean_se, tiny)).max())
    return PathComparison(
        deterministic=det,
        analytic=analytic,
        monte_carlo=mc,
        max_cov_error=max_cov_error,
        max_mean_error=max_mean_error,
        lambda_error=lambda_error,
        max_cov_sigma=max_cov_sigma,
        max_mean_sigma=max_mean_sigma,
    )
