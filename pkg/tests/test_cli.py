import json
import math

import numpy as np
import pytest

from qumodes import UnphysicalStateError, lambda_minus_closed_form
from qumodes.cli import COHERENT_COLUMNS, SWEEP_COLUMNS, main

E2R_45 = 0.35481338923357547


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out


def test_sweep_csv_contract(capsys):
    code, out = run_cli(capsys, "sweep")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert len(lines) == 8  # header plus the seven default angles
    first = dict(zip(SWEEP_COLUMNS, lines[1].split(",")))
    assert float(first["theta_deg"]) == 0.0
    assert float(first["var_x_mu"]) == pytest.approx(0.5, abs=1e-12)
    t = float(first["t"])
    assert float(first["lambda_minus"]) == pytest.approx(
        lambda_minus_closed_form(t, E2R_45), abs=1e-9
    )
    assert float(first["lambda_minus_ideal"]) == pytest.approx(
        lambda_minus_closed_form(t, 0.0), abs=1e-12
    )
    assert first["entangled"] == "false"
    assert first["lambda_se"] == ""
    row45 = dict(zip(SWEEP_COLUMNS, lines[5].split(",")))
    assert float(row45["theta_deg"]) == 45.0
    assert row45["entangled"] == "true"
    assert float(row45["E_N"]) > 0.0


def test_sweep_empty_angle_list(capsys):
    code, out = run_cli(capsys, "sweep", "--theta-deg", "")
    assert code == 0
    assert out.splitlines() == [",".join(SWEEP_COLUMNS)]


def test_sweep_json_format(capsys):
    code, out = run_cli(capsys, "sweep", "--theta-deg", "0,45", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert set(data) == set(SWEEP_COLUMNS)
    assert all(len(col) == 2 for col in data.values())
    assert data["entangled"] == [False, True]
    assert data["lambda_se"] == [None, None]


def test_config_file_merging(tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"theta_deg": "30", "squeezing_db": "3.0"}))
    code, out = run_cli(capsys, "sweep", "--config", str(config))
    assert code == 0
    assert len(out.splitlines()) == 2
    assert out.splitlines()[1].startswith("30.0,")

    # explicit flags override file values
    code, out = run_cli(
        capsys, "sweep", "--config", str(config), "--theta-deg", "10,20"
    )
    assert code == 0
    assert len(out.splitlines()) == 3


def test_config_rejects_unknown_keys(tmp_path, capsys):
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"thetas": "30"}))
    code, _ = run_cli(capsys, "sweep", "--config", str(config))
    assert code == 1


def test_bad_inputs_exit_one(capsys):
    assert run_cli(capsys, "sweep", "--theta-deg", "90")[0] == 1
    assert run_cli(capsys, "sweep", "--theta-deg", "abc")[0] == 1
    assert run_cli(capsys, "sweep", "--no-such-flag")[0] == 1
    assert run_cli(capsys, "sweep", "--loss", "1.5")[0] == 1
    assert run_cli(capsys, "sweep", "--squeezing-db", "1,2")[0] == 1


def test_numerical_failures_exit_two(monkeypatch, capsys):
    def boom(config):
        raise UnphysicalStateError("synthetic failure")

    monkeypatch.setattr("qumodes.cli.run_protocol", boom)
    code, _ = run_cli(capsys, "sweep", "--theta-deg", "45")
    assert code == 2


def test_unwritable_output_exits_three(capsys):
    code, _ = run_cli(capsys, "sweep", "--out", "/no/such/dir/out.csv")
    assert code == 3


def test_file_output_is_byte_deterministic(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for path in paths:
        code, _ = run_cli(
            capsys,
            "sweep",
            "--theta-deg", "45",
            "--mode", "mc",
            "--trajectories", "3000",
            "--seed", "99",
            "--out", str(path),
        )
        assert code == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    header = paths[0].read_text().splitlines()[0]
    assert header == ",".join(SWEEP_COLUMNS)


def test_trajectory_log(tmp_path, capsys):
    log = tmp_path / "clicks.csv"
    code, _ = run_cli(
        capsys,
        "sweep",
        "--theta-deg", "45",
        "--mode", "mc",
        "--trajectories", "40",
        "--trajectory-log", str(log),
    )
    assert code == 0
    lines = log.read_text().splitlines()
    assert lines[0] == "trajectory_id,detector_id,theta_deg,outcome"
    assert len(lines) == 1 + 40 * 3

    # refuse silently-meaningless logs
    assert run_cli(capsys, "sweep", "--trajectory-log", str(log))[0] == 1
    assert (
        run_cli(
            capsys, "sweep", "--theta-deg", "10,20", "--mode", "mc",
            "--trajectories", "40", "--trajectory-log", str(log),
        )[0]
        == 1
    )


def test_coherent_powers(capsys):
    code, out = run_cli(capsys, "coherent", "--theta-deg", "0")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == ",".join(COHERENT_COLUMNS)
    row = dict(zip(COHERENT_COLUMNS, lines[1].split(",")))
    assert float(row["power_x_mu_db"]) == pytest.approx(16.987672142659406, abs=1e-9)
    assert float(row["power_x_nu_db"]) == pytest.approx(3.010299956639812, abs=1e-9)
    assert float(row["mean_p_mu"]) == pytest.approx(0.0, abs=1e-12)


def test_coherent_input_slots(capsys):
    code, out = run_cli(capsys, "coherent", "--theta-deg", "45", "--input", "p_beta:6")
    assert code == 0
    row = dict(zip(COHERENT_COLUMNS, out.splitlines()[1].split(",")))
    assert float(row["mean_p_nu"]) != 0.0
    assert run_cli(capsys, "coherent", "--input", "x_alpha:3,p_beta:3")[0] == 1
    assert run_cli(capsys, "coherent", "--input", "y_alpha:3")[0] == 1


def test_cluster_info_network(capsys):
    code, out = run_cli(capsys, "cluster-info", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["preparation"] == "network"
    assert data["pure"] is True
    assert data["physical"] is True
    np.testing.assert_allclose(
        data["nullifier_variances"],
        [E2R_45 / 2.0, 3.0 * E2R_45 / 4.0, E2R_45 / 2.0],
        atol=1e-9,
    )
    # the network preparation is specific to the three-mode line
    assert run_cli(capsys, "cluster-info", "--graph", "line:4")[0] == 1


def test_cluster_info_canonical(capsys):
    code, out = run_cli(
        capsys,
        "cluster-info",
        "--prep", "canonical",
        "--graph", "line:4",
        "--format", "json",
    )
    assert code == 0
    data = json.loads(out)
    np.testing.assert_allclose(
        data["nullifier_variances"], [E2R_45 / 4.0] * 4, atol=1e-12
    )
    lossy = run_cli(
        capsys, "cluster-info", "--prep", "canonical", "--loss", "0.9",
        "--format", "json",
    )
    assert lossy[0] == 0
    assert json.loads(lossy[1])["pure"] is False


def test_selftest_passes(capsys):
    code, out = run_cli(capsys, "selftest")
    assert code == 0
    assert "FAIL" not in out
    assert out.count("PASS") == 10
