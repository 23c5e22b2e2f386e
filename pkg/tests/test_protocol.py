import json
import math

import numpy as np
import pytest

from qumodes import (
    OUTPUT_LABELS,
    ProtocolConfig,
    ResourceNoiseModel,
    added_noise_matrix,
    analytic_output,
    check_physicality,
    compare_paths,
    lambda_minus_closed_form,
    measurement_plan,
    prepare_premeasurement_state,
    run_protocol,
    transfer_matrix,
)
from tests.conftest import GAIN_GRID


def test_config_validation(r45):
    with pytest.raises(ValueError):
        ProtocolConfig(theta=math.pi / 2, squeezing_r=r45)
    with pytest.raises(ValueError):
        ProtocolConfig(theta=-math.pi / 2, squeezing_r=r45)
    with pytest.raises(ValueError):
        ProtocolConfig(theta=0.0, squeezing_r=-0.1)
    with pytest.raises(ValueError):
        ProtocolConfig(theta=0.0, squeezing_r=(r45, r45))
    with pytest.raises(ValueError):
        ProtocolConfig(theta=0.0, squeezing_r=r45, mode="exact")
    with pytest.raises(ValueError):
        ProtocolConfig(theta=0.0, squeezing_r=r45, loss=1.2)
    with pytest.raises(ValueError):
        ProtocolConfig(theta=0.0, squeezing_r=r45, mode="mc", n_trajectories=1)
    cfg = ProtocolConfig(theta=math.atan(0.7), squeezing_r=r45, mode="det")
    assert cfg.mode == "deterministic"
    assert cfg.gain == pytest.approx(0.7)
    assert cfg.squeezing_r == (r45, r45, r45)


def test_premeasurement_state_is_physical(r45):
    cfg = ProtocolConfig(theta=0.3, squeezing_r=r45, alpha_mean=(1.0, -0.5))
    state = prepare_premeasurement_state(cfg)
    assert state.n_modes == 5
    ok, margin = check_physicality(state)
    assert ok, margin


def test_plan_reads_three_detectors(r45):
    plan = measurement_plan(ProtocolConfig(theta=0.3, squeezing_r=r45))
    assert plan.labels == ("s1", "s3", "s2")
    assert plan.measured_modes == (0, 4, 2)
    assert plan.kept_modes == (1, 3)
    targets = {(r.target_mode, r.quadrature) for r in plan.feedforward}
    assert targets == {(1, "x"), (1, "p"), (3, "x"), (3, "p")}


@pytest.mark.parametrize("t", GAIN_GRID)
def test_deterministic_matches_analytic_model(t, r45):
    cfg = ProtocolConfig(theta=math.atan(t), squeezing_r=r45)
    det = run_protocol(cfg)
    model = analytic_output(cfg)
    np.testing.assert_allclose(det.output.cov, model.state.cov, atol=1e-12)
    np.testing.assert_allclose(det.output.mean, model.state.mean, atol=1e-12)
    assert det.lambda_minus == pytest.approx(model.lambda_minus, abs=1e-12)


def test_closed_form_matches_model(r45):
    e2r = math.exp(-2.0 * r45)
    for t in GAIN_GRID:
        cfg = ProtocolConfig(theta=math.atan(t), squeezing_r=r45)
        assert lambda_minus_closed_form(t, e2r) == pytest.approx(
            analytic_output(cfg).lambda_minus, abs=1e-12
        )
    with pytest.raises(ValueError):
        lambda_minus_closed_form(1.0, -0.2)


def test_input_swap_mirrors_outputs(r45):
    a = run_protocol(
        ProtocolConfig(theta=0.5, squeezing_r=r45, alpha_mean=(0.8, -0.1))
    ).output
    b = run_protocol(
        ProtocolConfig(theta=0.5, squeezing_r=r45, beta_mean=(0.8, -0.1))
    ).output
    swap = np.zeros((4, 4))
    swap[0:2, 2:4] = np.eye(2)
    swap[2:4, 0:2] = np.eye(2)
    np.testing.assert_allclose(a.mean, swap @ b.mean, atol=1e-12)
    np.testing.assert_allclose(a.cov, swap @ b.cov @ swap.T, atol=1e-12)


def test_negativity_grows_with_gain():
    values = []
    for t in (0.0, 0.5, 1.0, 2.0):
        cfg = ProtocolConfig(theta=math.atan(t), squeezing_r=1.0)
        values.append(run_protocol(cfg).log_negativity)
    np.testing.assert_allclose(
        values,
        [0.0, 0.27522185821650474, 0.5107028229326775, 0.7027184555987929],
        atol=1e-12,
    )
    assert values == sorted(values)


def test_negative_angle_is_equivalent(r45):
    plus = run_protocol(ProtocolConfig(theta=math.pi / 4, squeezing_r=r45))
    minus = run_protocol(ProtocolConfig(theta=-math.pi / 4, squeezing_r=r45))
    assert plus.lambda_minus == pytest.approx(minus.lambda_minus, abs=1e-12)


def test_loss_channel_behaviour(r45):
    base = ProtocolConfig(theta=math.pi / 4, squeezing_r=r45)
    unity = ProtocolConfig(theta=math.pi / 4, squeezing_r=r45, loss=1.0)
    np.testing.assert_array_equal(
        run_protocol(base).output.cov, run_protocol(unity).output.cov
    )
    lossy = run_protocol(ProtocolConfig(theta=math.pi / 4, squeezing_r=r45, loss=0.9))
    ok, margin = check_physicality(lossy.output)
    assert ok, margin
    assert lossy.lambda_minus >= run_protocol(base).lambda_minus - 1e-12
    with pytest.raises(ValueError):
        analytic_output(ProtocolConfig(theta=0.0, squeezing_r=r45, loss=0.9))


def test_excess_noise_matches_added_noise(r45):
    cfg = ProtocolConfig(theta=math.atan(1.0), squeezing_r=r45)
    result = run_protocol(cfg)
    noise = added_noise_matrix(ResourceNoiseModel.from_r(r45), cfg.gain)
    np.testing.assert_allclose(result.excess_noise(), noise, atol=1e-12)
    m = transfer_matrix(cfg.gain)
    np.testing.assert_allclose(
        result.output.cov, m @ (np.eye(4) / 4.0) @ m.T + noise, atol=1e-12
    )


def test_mc_statistics_and_abstention(r45):
    abstain = run_protocol(
        ProtocolConfig(
            theta=math.atan(0.29), squeezing_r=r45, mode="mc",
            n_trajectories=500, seed=42,
        )
    )
    assert abstain.mc is not None
    assert abstain.verdict.lambda_se > 0.0
    assert not abstain.verdict.confident

    confident = run_protocol(
        ProtocolConfig(
            theta=math.pi / 4, squeezing_r=r45, mode="mc",
            n_trajectories=5000, seed=7,
        )
    )
    assert confident.verdict.confident
    assert confident.entangled


def test_trajectory_records(r45):
    cfg = ProtocolConfig(
        theta=0.2, squeezing_r=r45, mode="mc", n_trajectories=50, seed=1,
        keep_trajectories=True,
    )
    records = list(run_protocol(cfg).iter_trajectory_records())
    assert len(records) == 50 * 3
    assert {rec.detector_id for rec in records} == {"s1", "s2", "s3"}
    dropped = run_protocol(
        ProtocolConfig(theta=0.2, squeezing_r=r45, mode="mc", n_trajectories=50, seed=1)
    )
    with pytest.raises(ValueError):
        next(dropped.iter_trajectory_records())


def test_result_serializes(r45):
    cfg = ProtocolConfig(theta=0.4, squeezing_r=r45, mode="mc", n_trajectories=200, seed=3)
    blob = json.dumps(run_protocol(cfg).to_dict())
    data = json.loads(blob)
    assert set(OUTPUT_LABELS) <= set(data["variances"])


def test_compare_paths(r45):
    cfg = ProtocolConfig(
        theta=math.pi / 4, squeezing_r=r45, mode="mc", n_trajectories=4000, seed=12
    )
    comparison = compare_paths(cfg)
    assert comparison.ok()
    assert comparison.max_cov_error < 1e-12
    assert comparison.max_cov_sigma < 5.0

    lossy = compare_paths(ProtocolConfig(theta=0.1, squeezing_r=r45, loss=0.8))
    assert lossy.analytic is None
    assert lossy.max_cov_error is None
