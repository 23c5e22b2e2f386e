import math

import numpy as np
import pytest

from qumodes import (
    GraphSpec,
    ResourceNoiseModel,
    erase_node,
    line_graph,
    make_cluster_canonical,
    make_linear_cluster3,
    minimum_pt_eigenvalue,
    nullifier_report,
    parse_graph,
    preparation_network,
    shorten_wire,
    squeezing_db_to_r,
    symplectic_eigenvalues,
    tune_gain,
)

E2R_45 = 0.35481338923357547


def test_graph_spec_basics():
    g = GraphSpec(3, ((1, 0, 1.0), (1, 2, 1.0)))
    assert g.edges == ((0, 1, 1.0), (1, 2, 1.0))
    assert g.neighbors(1) == (0, 2)
    assert g.neighbors(0) == (1,)
    assert g.weight(2, 1) == 1.0
    assert g.weight(0, 2) == 0.0
    adj = g.adjacency()
    np.testing.assert_allclose(adj, adj.T)
    np.testing.assert_allclose(np.diag(adj), 0.0)

    loop = GraphSpec(2, ((0, 0, 0.5), (0, 1, 1.0)))
    assert loop.adjacency()[0, 0] == 0.5

    with pytest.raises(ValueError):
        GraphSpec(3, ((0, 1, 1.0), (1, 0, 2.0)))
    with pytest.raises(ValueError):
        GraphSpec(2, ((0, 3, 1.0),))


def test_graph_parse_and_relabel():
    assert parse_graph("line:4") == line_graph(4)
    assert line_graph(3).edges == ((0, 1, 1.0), (1, 2, 1.0))
    with pytest.raises(ValueError):
        parse_graph("ring:4")

    g = line_graph(3).drop_node(1, new_edges=((0, 2, 1.0),))
    assert g.n_nodes == 2
    assert g.edges == ((0, 1, 1.0),)


def test_preparation_network_is_unitary():
    u = preparation_network()
    np.testing.assert_allclose(u @ u.conj().T, np.eye(3), atol=1e-14)


def test_network_cluster_is_pure(r45):
    state = make_linear_cluster3(r45)
    np.testing.assert_allclose(symplectic_eigenvalues(state.cov), 0.25, atol=1e-12)


def test_network_nullifier_statistics(r45):
    state = make_linear_cluster3(r45)
    report = nullifier_report(state, line_graph(3))
    np.testing.assert_allclose(report.means, 0.0, atol=1e-14)
    noise = ResourceNoiseModel.from_r(r45)
    assert noise.var_delta1 == pytest.approx(0.17740669461678776, abs=1e-15)
    assert noise.var_delta2 == pytest.approx(0.2661100419251815, abs=1e-15)
    assert noise.cov_delta13 == pytest.approx(0.08870334730839388, abs=1e-15)
    np.testing.assert_allclose(report.covariance, noise.delta_cov(), atol=1e-12)
    assert report.covariance[0, 1] == pytest.approx(0.0, abs=1e-14)
    assert report.covariance[0, 2] == pytest.approx(noise.cov_delta13, abs=1e-12)


def test_network_nullifiers_unsqueezed_resource():
    report = nullifier_report(make_linear_cluster3(0.0), line_graph(3))
    np.testing.assert_allclose(
        report.variances, [0.5, 0.75, 0.5], atol=1e-12
    )


def test_network_per_mode_squeezing(r45):
    state = make_linear_cluster3((r45, 0.0, r45))
    report = nullifier_report(state, line_graph(3))
    # the middle nullifier only sees the middle resource mode
    assert report.variances[1] == pytest.approx(0.75, abs=1e-12)


def test_network_matches_squeezed_quadrature_pullback(r45):
    """Nullifier rows pulled back through the network land on squeezed inputs.

    In the symplectic picture each nullifier row, conjugated by the
    preparation, must have no x components and p components proportional
    to e^{-r}; this pins the preparation as a function, not just its
    output moments.
    """
    from qumodes import SymplecticOp, passive_network, squeezer

    prep = SymplecticOp(np.eye(6))
    for mode in range(3):
        prep = prep.then(squeezer(3, mode, math.exp(r45)))
    prep = prep.then(passive_network(preparation_network()))
    rows = np.zeros((3, 6))
    adj = line_graph(3).adjacency()
    for j in range(3):
        rows[j, 2 * j + 1] = 1.0
        rows[j, 0::2] -= adj[j]
    pulled = rows @ prep.matrix
    np.testing.assert_allclose(pulled[:, 0::2], 0.0, atol=1e-12)
    expected_p = np.array(
        [
            [math.sqrt(2.0), 0.0, 0.0],
            [0.0, math.sqrt(3.0), 0.0],
            [1.0 / math.sqrt(2.0), 0.0, math.sqrt(1.5)],
        ]
    ) * math.exp(-r45)
    np.testing.assert_allclose(pulled[:, 1::2], expected_p, atol=1e-12)


def test_canonical_cluster_nullifiers(r45):
    graph = line_graph(3)
    report = nullifier_report(make_cluster_canonical(graph, r45), graph)
    np.testing.assert_allclose(
        report.covariance, np.eye(3) * (E2R_45 / 4.0), atol=1e-12
    )


def test_canonical_cluster_with_self_loop(r45):
    graph = GraphSpec(2, ((0, 1, 1.0), (1, 1, 0.7)))
    report = nullifier_report(make_cluster_canonical(graph, r45), graph)
    np.testing.assert_allclose(
        report.covariance, np.eye(2) * (E2R_45 / 4.0), atol=1e-12
    )


def test_erase_node_canonical_separates(r45):
    graph = line_graph(3)
    state = make_cluster_canonical(graph, r45)
    shaped = erase_node(state, graph, 1)
    assert shaped.outcomes is None
    assert shaped.graph.n_nodes == 2
    assert shaped.graph.edges == ()
    np.testing.assert_allclose(shaped.state.cov[0:2, 2:4], 0.0, atol=1e-12)


def test_erase_node_stochastic_reproducible(r45):
    graph = line_graph(3)
    state = make_linear_cluster3(r45)
    a = erase_node(state, graph, 1, rng=np.random.default_rng(8))
    b = erase_node(state, graph, 1, rng=np.random.default_rng(8))
    assert a.outcomes is not None and set(a.outcomes) == {"m"}
    assert a.outcomes["m"] == b.outcomes["m"]
    np.testing.assert_array_equal(a.state.mean, b.state.mean)
    np.testing.assert_allclose(a.state.cov, b.state.cov, atol=1e-14)


@pytest.mark.parametrize(
    "r, lam",
    [
        (0.0, 0.25),
        ("db45", 0.10777293056424761),
        (1.0, 0.0413904183540694),
    ],
)
def test_shorten_wire_pair_strength(r, lam, r45):
    rv = r45 if r == "db45" else r
    graph = line_graph(3)
    shaped = shorten_wire(make_linear_cluster3(rv), graph, 1)
    assert shaped.graph.edges == ((0, 1, 1.0),)
    assert minimum_pt_eigenvalue(shaped.state) == pytest.approx(lam, abs=1e-12)


def test_shorten_wire_errors(r45):
    graph = line_graph(3)
    state = make_linear_cluster3(r45)
    with pytest.raises(ValueError):
        shorten_wire(state, graph, 0)
    with pytest.raises(ValueError):
        shorten_wire(state, graph, 1, keep_neighbor=5)
    heavy = GraphSpec(3, ((0, 1, 2.0), (1, 2, 1.0)))
    with pytest.raises(ValueError):
        shorten_wire(make_cluster_canonical(heavy, r45), heavy, 1)


def test_tune_gain_zero_angle_equals_erase(r45):
    graph = line_graph(3)
    state = make_linear_cluster3(r45)
    tuned = tune_gain(state, graph, 1, 0.0)
    erased = erase_node(state, graph, 1)
    np.testing.assert_allclose(tuned.state.cov, erased.state.cov, atol=1e-14)
    np.testing.assert_allclose(tuned.state.mean, erased.state.mean, atol=1e-14)
    assert tuned.graph.edges == ()


def test_tune_gain_graph_and_guard(r45):
    graph = line_graph(3)
    state = make_linear_cluster3(r45)
    theta = math.atan(0.5)
    tuned = tune_gain(state, graph, 1, theta)
    assert tuned.graph.n_nodes == 2
    weights = {(j, k): w for j, k, w in tuned.graph.edges}
    assert weights[(0, 0)] == pytest.approx(0.5)
    assert weights[(0, 1)] == pytest.approx(0.5)
    assert weights[(1, 1)] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        tune_gain(state, graph, 1, math.pi / 2)


def test_tune_gain_mixes_middle_nullifier(r45):
    """The surviving combinations d_end + t*d_mid keep their variance.

    After the rotated measurement the kept pair's nullifiers against the
    tuned graph must reproduce Var(d_end) + t^2 Var(d_mid) from the
    original resource noise, the exact operator identity behind the gain
    dial.
    """
    t = 2.0
    graph = line_graph(3)
    state = make_linear_cluster3((r45, 1.0, 0.3))
    tuned = tune_gain(state, graph, 1, math.atan(t))
    report = nullifier_report(tuned.state, tuned.graph)
    noise = ResourceNoiseModel.from_r((r45, 1.0, 0.3))
    np.testing.assert_allclose(
        report.variances,
        [
            noise.var_delta1 + t**2 * noise.var_delta2,
            noise.var_delta3 + t**2 * noise.var_delta2,
        ],
        atol=1e-12,
    )
