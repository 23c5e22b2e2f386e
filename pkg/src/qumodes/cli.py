"""Command-line runner emitting machine-readable sweep data.

Four subcommands: ``sweep`` (entanglement witness vs angle), ``coherent``
(output powers for one coherent input), ``cluster-info`` (resource state
report), and ``selftest`` (acceptance suite plus a byte-determinism
check). Output is CSV or JSON, chosen with --format; CSV floats are
written with repr() so identical configs produce identical bytes.

Exit codes: 0 success, 1 configuration error, 2 numerical or
physicality failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from collections.abc import Sequence

import numpy as np

from . import acceptance
from .cluster import (
    make_cluster_canonical,
    make_linear_cluster3,
    nullifier_report,
    parse_graph,
)
from .errors import DegenerateMeasurementError, UnphysicalStateError
from .gates import loss_channel
from .measurement import write_trajectory_csv
from .protocol import ProtocolConfig, lambda_minus_closed_form, run_protocol
from .states import check_physicality, symplectic_eigenvalues
from .units import amplitude_from_power_db, squeezing_db_to_r

DEFAULT_THETA_DEG = "0,11.3,26.6,35.3,45,54.7,63.4"
"""The seven tabulated measurement angles, in degrees."""

SWEEP_COLUMNS = (
    "theta_deg",
    "t",
    "var_x_mu",
    "var_p_mu",
    "var_x_nu",
    "var_p_nu",
    "mean_x_mu",
    "mean_p_mu",
    "mean_x_nu",
    "mean_p_nu",
    "lambda_minus",
    "E_N",
    "db_var_x_mu",
    "db_var_p_mu",
    "db_var_x_nu",
    "db_var_p_nu",
    "entangled",
    "lambda_se",
    "verdict_confident",
    "lambda_minus_ideal",
    "E_N_ideal",
)

COHERENT_COLUMNS = (
    "theta_deg",
    "t",
    "power_x_mu_db",
    "power_p_mu_db",
    "power_x_nu_db",
    "power_p_nu_db",
    "mean_x_mu",
    "mean_p_mu",
    "mean_x_nu",
    "mean_p_nu",
    "var_x_mu",
    "var_p_mu",
    "var_x_nu",
    "var_p_nu",
)

INPUT_SLOTS = ("x_alpha", "p_alpha", "x_beta", "p_beta")

_DEFAULTS = {
    "theta_deg": DEFAULT_THETA_DEG,
    "squeezing_db": "4.5",
    "mode": "det",
    "trajectories": 100_000,
    "seed": 0,
    "loss": None,
    "backend": "auto",
    "out": None,
    "format": "csv",
    "input": "x_alpha:13.8",
    "graph": "line:3",
    "prep": "network",
    "trajectory_log": None,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qumodes",
        description="Gaussian simulator for the cluster-based tuneable entangling gate",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--theta-deg", help="comma-separated detector angles in degrees")
        p.add_argument(
            "--squeezing-db",
            help="resource squeezing magnitude in dB, one value or three (per mode)",
        )
        p.add_argument("--mode", choices=["det", "deterministic", "mc"])
        p.add_argument("--trajectories", type=int, help="Monte-Carlo trajectory count")
        p.add_argument("--seed", type=int, help="Monte-Carlo seed")
        p.add_argument(
            "--loss",
            help="transmission of a loss channel on the cluster modes, "
            "one value or three (1 = lossless)",
        )
        p.add_argument("--backend", choices=["auto", "python", "compiled"])
        p.add_argument("--out", help="output path (stdout when omitted)")
        p.add_argument("--format", choices=["csv", "json"])
        p.add_argument("--config", help="JSON file with the same keys; flags win")
        p.add_argument(
            "--trajectory-log",
            help="CSV path for per-trajectory detector records "
            "(mc mode, single angle only)",
        )

    common(sub.add_parser("sweep", help="entanglement witness across angles"))
    coherent = sub.add_parser("coherent", help="output powers for one coherent input")
    common(coherent)
    coherent.add_argument(
        "--input",
        help="coherent input as slot:power_db, slot one of "
        + ", ".join(INPUT_SLOTS)
        + " (default x_alpha:13.8)",
    )
    info = sub.add_parser("cluster-info", help="resource cluster report")
    common(info)
    info.add_argument("--graph", help="graph spec, e.g. line:3")
    info.add_argument("--prep", choices=["network", "canonical"])
    sub.add_parser("selftest", help="acceptance suite plus determinism check")
    return parser


def _merge_config(args: argparse.Namespace) -> dict:
    """Builtin defaults, overlaid by --config file, overlaid by flags."""
    merged = dict(_DEFAULTS)
    path = getattr(args, "config", None)
    if path is not None:
        with open(path) as fh:
            try:
                loaded = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"config file {path}: {exc}") from exc
        unknown = set(loaded) - set(_DEFAULTS)
        if unknown:
            raise ValueError(f"config file {path}: unknown keys {sorted(unknown)}")
        merged.update(loaded)
    for key in _DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    return merged


def _parse_float_list(value, name: str) -> list[float]:
    if isinstance(value, (int, float)):
        return [float(value)]
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    text = str(value).strip()
    if not text:
        return []
    try:
        return [float(part) for part in text.split(",")]
    except ValueError as exc:
        raise ValueError(f"{name}: expected comma-separated numbers, got {value!r}") from exc


def _squeezing_to_r(value) -> float | tuple[float, float, float]:
    dbs = _parse_float_list(value, "--squeezing-db")
    if len(dbs) == 1:
        return squeezing_db_to_r(dbs[0])
    if len(dbs) == 3:
        return tuple(squeezing_db_to_r(db) for db in dbs)
    raise ValueError(f"--squeezing-db takes one value or three, got {len(dbs)}")


def _loss_value(value):
    if value is None:
        return None
    etas = _parse_float_list(value, "--loss")
    if len(etas) == 1:
        return etas[0]
    if len(etas) == 3:
        return tuple(etas)
    raise ValueError(f"--loss takes one value or three, got {len(etas)}")


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _render_table(columns: Sequence[str], rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        data = {col: [row[col] for row in rows] for col in columns}
        return json.dumps(data, indent=2) + "\n"
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_format_cell(row[col]) for col in columns))
    return "\n".join(lines) + "\n"


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)


def _protocol_config(merged: dict, theta_deg: float, **overrides) -> ProtocolConfig:
    kwargs = dict(
        theta=math.radians(theta_deg),
        squeezing_r=_squeezing_to_r(merged["squeezing_db"]),
        loss=_loss_value(merged["loss"]),
        mode=merged["mode"],
        n_trajectories=int(merged["trajectories"]),
        seed=int(merged["seed"]),
        backend=merged["backend"],
    )
    kwargs.update(overrides)
    return ProtocolConfig(**kwargs)


def _maybe_log_trajectories(merged: dict, thetas: list[float], results: list) -> None:
    log_path = merged["trajectory_log"]
    if log_path is None:
        return
    if merged["mode"] not in ("mc",):
        raise ValueError("--trajectory-log needs --mode mc")
    if len(thetas) != 1:
        raise ValueError("--trajectory-log records a single angle, got " f"{len(thetas)}")
    write_trajectory_csv(log_path, results[0].iter_trajectory_records())


def cmd_sweep(merged: dict) -> int:
    thetas = _parse_float_list(merged["theta_deg"], "--theta-deg")
    keep = merged["trajectory_log"] is not None
    rows = []
    results = []
    for theta_deg in thetas:
        config = _protocol_config(merged, theta_deg, keep_trajectories=keep)
        res = run_protocol(config)
        results.append(res)
        variances = res.variances()
        means = res.means()
        db = res.variances_db()
        lam_ideal = lambda_minus_closed_form(config.gain, 0.0)
        rows.append(
            {
                "theta_deg": float(theta_deg),
                "t": config.gain,
                **{f"var_{k}": v for k, v in variances.items()},
                **{f"mean_{k}": v for k, v in means.items()},
                "lambda_minus": res.lambda_minus,
                "E_N": res.log_negativity,
                **{f"db_var_{k}": v for k, v in db.items()},
                "entangled": res.entangled,
                "lambda_se": res.verdict.lambda_se,
                "verdict_confident": res.verdict.confident,
                "lambda_minus_ideal": lam_ideal,
                "E_N_ideal": max(0.0, -math.log(4.0 * lam_ideal)),
            }
        )
    _maybe_log_trajectories(merged, thetas, results)
    _emit(_render_table(SWEEP_COLUMNS, rows, merged["format"]), merged["out"])
    return 0


def _parse_input_spec(text: str) -> tuple[str, float]:
    parts = str(text).split(",")
    if len(parts) != 1:
        raise ValueError(
            "coherent inputs are tested one quadrature at a time; got "
            f"{len(parts)} input specs"
        )
    slot, sep, power = parts[0].partition(":")
    if not sep or slot not in INPUT_SLOTS:
        raise ValueError(
            f"--input must look like x_alpha:13.8 with slot in {INPUT_SLOTS}, got {text!r}"
        )
    return slot, float(power)


def cmd_coherent(merged: dict) -> int:
    slot, power_db = _parse_input_spec(merged["input"])
    amp = amplitude_from_power_db(power_db)
    alpha = (amp, 0.0) if slot == "x_alpha" else (0.0, amp) if slot == "p_alpha" else (0.0, 0.0)
    beta = (amp, 0.0) if slot == "x_beta" else (0.0, amp) if slot == "p_beta" else (0.0, 0.0)
    thetas = _parse_float_list(merged["theta_deg"], "--theta-deg")
    keep = merged["trajectory_log"] is not None
    rows = []
    results = []
    for theta_deg in thetas:
        config = _protocol_config(
            merged, theta_deg, alpha_mean=alpha, beta_mean=beta, keep_trajectories=keep
        )
        res = run_protocol(config)
        results.append(res)
        power = res.power_db()
        means = res.means()
        variances = res.variances()
        rows.append(
            {
                "theta_deg": float(theta_deg),
                "t": config.gain,
                **{f"power_{k}_db": v for k, v in power.items()},
                **{f"mean_{k}": v for k, v in means.items()},
                **{f"var_{k}": v for k, v in variances.items()},
            }
        )
    _maybe_log_trajectories(merged, thetas, results)
    _emit(_render_table(COHERENT_COLUMNS, rows, merged["format"]), merged["out"])
    return 0


def cmd_cluster_info(merged: dict) -> int:
    graph = parse_graph(merged["graph"])
    dbs = _parse_float_list(merged["squeezing_db"], "--squeezing-db")
    if len(dbs) == 1:
        dbs = dbs * graph.n_nodes
    if len(dbs) != graph.n_nodes:
        raise ValueError(
            f"--squeezing-db takes one value or {graph.n_nodes} for {merged['graph']}"
        )
    r_values = [squeezing_db_to_r(db) for db in dbs]
    if merged["prep"] == "network":
        if graph.n_nodes != 3 or graph.edges != ((0, 1, 1.0), (1, 2, 1.0)):
            raise ValueError("the network preparation is defined for line:3")
        state = make_linear_cluster3(tuple(r_values))
    else:
        state = make_cluster_canonical(graph, tuple(r_values))
    loss = _loss_value(merged["loss"])
    if loss is not None:
        etas = (loss,) * graph.n_nodes if isinstance(loss, float) else loss
        if len(etas) != graph.n_nodes:
            raise ValueError(f"--loss takes one value or {graph.n_nodes} here")
        for mode, eta in enumerate(etas):
            state = loss_channel(state, mode, eta)
    report = nullifier_report(state, graph)
    spectrum = symplectic_eigenvalues(state.cov)
    ok, lam_min = check_physicality(state)
    pure = bool(np.allclose(spectrum, 0.25, atol=1e-9))
    payload = {
        "graph": graph.to_dict(),
        "preparation": merged["prep"],
        "squeezing_db": dbs,
        "squeezing_r": r_values,
        "e2r": [math.exp(-2.0 * r) for r in r_values],
        "loss": None if loss is None else ([loss] if isinstance(loss, float) else list(loss)),
        "nullifier_means": report.means.tolist(),
        "nullifier_variances": report.variances.tolist(),
        "nullifier_covariance": report.covariance.tolist(),
        "symplectic_eigenvalues": spectrum.tolist(),
        "pure": pure,
        "physical": ok,
        "physicality_margin": lam_min - 0.25,
    }
    if merged["format"] == "json":
        _emit(json.dumps(payload, indent=2) + "\n", merged["out"])
        return 0
    lines = [
        f"graph: {merged['graph']} nodes={graph.n_nodes} edges={graph.edges}",
        f"preparation: {merged['prep']}",
        "squeezing: "
        + ", ".join(
            f"{db} dB (r={r:.6f}, e^-2r={math.exp(-2 * r):.6f})"
            for db, r in zip(dbs, r_values)
        ),
    ]
    if loss is not None:
        lines.append(f"loss transmission: {loss}")
    for j in range(graph.n_nodes):
        lines.append(
            f"nullifier d{j + 1}: mean={float(report.means[j])!r} variance={float(report.variances[j])!r}"
        )
    lines.append("nullifier covariance:")
    for row in report.covariance:
        lines.append("  " + "  ".join(f"{v: .10f}" for v in row))
    lines.append("symplectic spectrum: " + ", ".join(repr(float(v)) for v in spectrum))
    lines.append(f"pure: {pure}")
    lines.append(f"physicality margin (min eigenvalue - 1/4): {float(lam_min - 0.25)!r}")
    _emit("\n".join(lines) + "\n", merged["out"])
    return 0


def _determinism_check() -> acceptance.CheckResult:
    """Same seed, same config: the rendered sweep must be byte-identical."""
    merged = dict(_DEFAULTS)
    merged.update(theta_deg="45", mode="mc", trajectories=4000, seed=1234)

    def render() -> str:
        config = _protocol_config(merged, 45.0)
        res = run_protocol(config)
        return _render_table(
            SWEEP_COLUMNS[:2] + ("lambda_minus", "lambda_se"),
            [
                {
                    "theta_deg": 45.0,
                    "t": config.gain,
                    "lambda_minus": res.lambda_minus,
                    "lambda_se": res.verdict.lambda_se,
                }
            ],
            "csv",
        )

    first, second = render(), render()
    return acceptance.CheckResult(
        "determinism",
        first == second,
        "seed-pinned Monte-Carlo sweep rendered byte-identically twice"
        if first == second
        else "two renders of the same seeded sweep differ",
    )


def cmd_selftest() -> int:
    results = acceptance.run_all()
    results.append(_determinism_check())
    print(acceptance.format_report(results))
    return 0 if all(r.passed for r in results) else 2


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags; remap to the config-error code
        return 0 if exc.code in (0, None) else 1
    try:
        if args.command == "selftest":
            return cmd_selftest()
        merged = _merge_config(args)
        if args.command == "sweep":
            return cmd_sweep(merged)
        if args.command == "coherent":
            return cmd_coherent(merged)
        return cmd_cluster_info(merged)
    except (UnphysicalStateError, DegenerateMeasurementError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
