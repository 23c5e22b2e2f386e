import math

import numpy as np
import pytest

from qumodes import (
    ProtocolConfig,
    analytic_output,
    apply_symplectic,
    minimum_pt_eigenvalue,
    minimum_pt_eigenvalue_determinant,
    partial_transpose,
    rotation,
    squeezer,
    vacuum,
    verdict,
)

E2R_45 = 0.35481338923357547


def grid_covariances():
    covs = []
    for t in (0.0, 0.5, 1.0, 2.0):
        for e2r in (0.0, 0.1, E2R_45, 1.0):
            cfg = ProtocolConfig(theta=math.atan(t), squeezing_r=1.0)
            covs.append(analytic_output(cfg, e2r=e2r).state.cov)
    return covs


def test_partial_transpose_flips_signs():
    cov = np.arange(16, dtype=float).reshape(4, 4)
    cov = cov + cov.T  # symmetric input
    pt = partial_transpose(cov, mode=1)
    # x1-x2 and p1-x2 blocks keep their sign, anything with a single p2 flips
    assert pt[0, 2] == cov[0, 2]
    assert pt[0, 3] == -cov[0, 3]
    assert pt[1, 3] == -cov[1, 3]
    assert pt[3, 3] == cov[3, 3]
    pt0 = partial_transpose(cov, mode=0)
    assert pt0[1, 2] == -cov[1, 2]
    assert pt0[1, 1] == cov[1, 1]


def test_vacuum_sits_on_boundary():
    lam = minimum_pt_eigenvalue(vacuum(2))
    assert lam == pytest.approx(0.25, abs=1e-12)
    v = verdict(vacuum(2))
    assert not v.entangled
    assert v.log_negativity == pytest.approx(0.0, abs=1e-12)


def test_eigensolver_and_determinant_routes_agree():
    for cov in grid_covariances():
        a = minimum_pt_eigenvalue(cov)
        b = minimum_pt_eigenvalue_determinant(cov)
        assert a == pytest.approx(b, abs=1e-12)


def test_local_operations_leave_negativity_invariant():
    base = analytic_output(ProtocolConfig(theta=math.pi / 4, squeezing_r=1.0)).state
    lam = minimum_pt_eigenvalue(base)
    rng = np.random.default_rng(17)
    for _ in range(5):
        local = rotation(2, 0, rng.uniform(-3, 3)).then(
            squeezer(2, 1, math.exp(rng.uniform(-1, 1)))
        )
        moved = apply_symplectic(base, local)
        assert minimum_pt_eigenvalue(moved) == pytest.approx(lam, abs=1e-10)


def test_frozen_grid_value():
    cfg = ProtocolConfig(theta=math.pi / 4, squeezing_r=1.0)
    lam = minimum_pt_eigenvalue(analytic_output(cfg, e2r=E2R_45).state)
    assert lam == pytest.approx(0.19962105918108744, abs=1e-12)


def test_verdict_abstains_near_boundary():
    cov = analytic_output(
        ProtocolConfig(theta=math.pi / 4, squeezing_r=1.0), e2r=E2R_45
    ).state.cov
    near = verdict(cov, lambda_se=0.05)
    assert not near.confident
    far = verdict(cov, lambda_se=1e-4)
    assert far.confident
    assert far.entangled
    assert far.log_negativity == pytest.approx(-math.log(4 * far.lambda_minus))


def test_invalid_inputs_rejected():
    with pytest.raises(ValueError):
        minimum_pt_eigenvalue(vacuum(3))
    with pytest.raises(ValueError):
        minimum_pt_eigenvalue(np.diag([1.0, 1.0, -1.0, 1.0]))
