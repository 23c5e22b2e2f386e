"""Gaussian simulator for measurement-based two-mode entangling gates.

Phase-space toolbox (states, gates, homodyne conditioning), cluster-state
resources with nullifier bookkeeping, and the full tuneable-gate circuit
with deterministic, Monte-Carlo, and closed-form evaluation routes.
"""

from .backends import HAS_COMPILED_KERNEL, available_backends, select_backend
from .cluster import (
    GraphSpec,
    NullifierReport,
    ResourceNoiseModel,
    ShapedCluster,
    erase_node,
    line_graph,
    make_cluster_canonical,
    make_linear_cluster3,
    nullifier_report,
    parse_graph,
    preparation_network,
    shorten_wire,
    tune_gain,
)
from .entanglement import (
    EntanglementVerdict,
    minimum_pt_eigenvalue,
    minimum_pt_eigenvalue_determinant,
    partial_transpose,
    verdict,
)
from .errors import DegenerateMeasurementError, UnphysicalStateError
from .gates import (
    beamsplitter,
    controlled_z,
    loss_channel,
    passive_network,
    quadratic_phase,
    rotation,
    squeezer,
    tunable_entangler,
)
from .measurement import (
    FeedforwardRule,
    HomodyneSpec,
    MeasurementRecord,
    apply_feedforward,
    homodyne_condition,
    homodyne_sample,
    homodyne_statistics,
    write_trajectory_csv,
)
from .protocol import (
    OUTPUT_LABELS,
    AnalyticOutput,
    PathComparison,
    ProtocolConfig,
    ProtocolResult,
    added_noise_matrix,
    analytic_output,
    compare_paths,
    lambda_minus_closed_form,
    measurement_plan,
    prepare_premeasurement_state,
    run_protocol,
    transfer_matrix,
)
from .simulate import (
    MeasurementPlan,
    MonteCarloRun,
    TrajectoryModel,
    derive_trajectory_model,
    run_deferred,
    run_single_trajectory,
    sample_trajectories,
)
from .states import (
    Displacement,
    GaussianState,
    SymplecticOp,
    apply_symplectic,
    check_physicality,
    discard_mode,
    displace,
    symplectic_eigenvalues,
    symplectic_form,
    tensor,
    vacuum,
)
from .units import (
    VACUUM_VARIANCE,
    amplitude_from_power_db,
    db_to_variance,
    signal_power_db,
    squeezing_db_to_e2r,
    squeezing_db_to_r,
    variance_to_db,
)

__version__ = "0.1.0"

__all__ = [
    "HAS_COMPILED_KERNEL",
    "available_backends",
    "select_backend",
    "GraphSpec",
    "NullifierReport",
    "ResourceNoiseModel",
    "ShapedCluster",
    "erase_node",
    "line_graph",
    "make_cluster_canonical",
    "make_linear_cluster3",
    "nullifier_report",
    "parse_graph",
    "preparation_network",
    "shorten_wire",
    "tune_gain",
    "EntanglementVerdict",
    "minimum_pt_eigenvalue",
    "minimum_pt_eigenvalue_determinant",
    "partial_transpose",
    "verdict",
    "DegenerateMeasurementError",
    "UnphysicalStateError",
    "beamsplitter",
    "controlled_z",
    "loss_channel",
    "passive_network",
    "quadratic_phase",
    "rotation",
    "squeezer",
    "tunable_entangler",
    "FeedforwardRule",
    "HomodyneSpec",
    "MeasurementRecord",
    "apply_feedforward",
    "homodyne_condition",
    "homodyne_sample",
    "homodyne_statistics",
    "write_trajectory_csv",
    "OUTPUT_LABELS",
    "AnalyticOutput",
    "PathComparison",
    "ProtocolConfig",
    "ProtocolResult",
    "added_noise_matrix",
    "analytic_output",
    "compare_paths",
    "lambda_minus_closed_form",
    "measurement_plan",
    "prepare_premeasurement_state",
    "run_protocol",
    "transfer_matrix",
    "MeasurementPlan",
    "MonteCarloRun",
    "TrajectoryModel",
    "derive_trajectory_model",
    "run_deferred",
    "run_single_trajectory",
    "sample_trajectories",
    "Displacement",
    "GaussianState",
    "SymplecticOp",
    "apply_symplectic",
    "check_physicality",
    "discard_mode",
    "displace",
    "symplectic_eigenvalues",
    "symplectic_form",
    "tensor",
    "vacuum",
    "VACUUM_VARIANCE",
    "amplitude_from_power_db",
    "db_to_variance",
    "signal_power_db",
    "squeezing_db_to_e2r",
    "squeezing_db_to_r",
    "variance_to_db",
    "__version__",
]
