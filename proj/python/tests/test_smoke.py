import math

import numpy as np
import pytest

import mtdiff


def ring(n=6):
    edges = [(k, (k + 1) % n) for k in range(n)]
    clusters = [0] * (n // 2) + [1] * (n - n // 2)
    return mtdiff.NetworkSpec(n, 2, edges, clusters)


def linear_scenario(net):
    model = mtdiff.LinearModelSpec(
        [np.array([0.5, -0.4]), np.array([0.3, 0.2])],
        [1.0] * net.n_nodes,
        [0.01] * net.n_nodes,
    )
    return mtdiff.Scenario(net, model)


def test_network_and_matrices():
    net = ring()
    assert net.n_clusters == 2
    A = mtdiff.build_uniform_A(net)
    np.testing.assert_allclose(A.sum(axis=0), 1.0)
    P = mtdiff.build_uniform_P(net)
    assert mtdiff.validate(net, A, mtdiff.build_identity_C(net), P, 0.1) is None
    bad = A.copy()
    bad[0, 0] -= 0.1
    assert "column" in mtdiff.validate(net, bad, mtdiff.build_identity_C(net), P)


def test_invalid_network_raises():
    with pytest.raises(ValueError):
        mtdiff.NetworkSpec(3, 1, [(0, 1)], [0, 0, 0])


def test_geometric_generator_is_deterministic():
    a = mtdiff.random_geometric_network(30, 0.4, 3, n_clusters=2)
    b = mtdiff.random_geometric_network(30, 0.4, 3, n_clusters=2)
    assert a.to_edge_list() == b.to_edge_list()
    assert len(a.positions) == 30


def test_run_and_theory_agree_roughly():
    net = ring()
    sc = linear_scenario(net)
    strategy = mtdiff.make_strategy(mtdiff.Variant.Clustered, net)
    hp = mtdiff.Hyperparams(0.05, 0.1)
    traj = mtdiff.run(strategy, sc, hp, 300, seed=1)
    assert len(traj.msd) == 301 and not traj.diverged

    m = mtdiff.build_moments(strategy, sc, hp)
    assert 0 < hp.mu < mtdiff.step_size_bound(m)
    radius, converged = mtdiff.k_spectral_radius(m.B)
    assert converged
    assert radius == pytest.approx(mtdiff.spectral_radius_B(m) ** 2, rel=1e-8)
    zeta = mtdiff.transient_msd(m, 5000)
    assert zeta[-1] == pytest.approx(mtdiff.steady_state_msd(m), rel=1e-6)


def test_apply_k_matches_kronecker():
    rng = np.random.default_rng(0)
    B = rng.normal(size=(4, 4))
    X = rng.normal(size=(4, 4))
    K = np.kron(B.T, B.T)
    got = mtdiff.apply_K(B, X).flatten(order="F")
    np.testing.assert_allclose(got, K @ X.flatten(order="F"), rtol=1e-12, atol=1e-12)


def test_monte_carlo_on_bundled_config():
    cfg = mtdiff.model_validation_config()
    cfg.n_runs = 5
    cfg.n_iters = 100
    res = mtdiff.monte_carlo(cfg)
    assert len(res.curves) == 3
    c = res.curves[0]
    assert len(c.sim_msd) == 101
    assert len(c.theory_msd) == 101
    assert math.isfinite(mtdiff.to_db(c.sim_msd[-1]))

    cfg.workers = 2
    again = mtdiff.monte_carlo(cfg)
    assert again.curves[0].sim_msd == c.sim_msd


def test_localization_desk_config_loads():
    cfg = mtdiff.localization_config("desk")
    assert cfg.scenario.truth.n_nodes == 40
    assert len(cfg.variants) == 3
