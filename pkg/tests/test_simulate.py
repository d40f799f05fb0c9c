import math

import numpy as np
import pytest

import netinfer as ni
from netinfer.errors import ValidationError

from conftest import chain_dag

DISCRETE = ni.EstimatorKind.discrete_plugin()


def test_logistic_orbit_exact():
    cfg = ni.GdsConfig(
        graph=ni.Dag.empty(1),
        model=ni.CoupledLogisticModel(r=4.0, epsilon=0.5),
        n=4, burn_in=0, seed=0, initial_states=(0.5,),
    )
    out = ni.simulate_coupled_logistic(cfg)
    assert out.states[0].tolist() == [1.0, 0.0, 0.0, 0.0]
    assert np.array_equal(out.observations.series, out.states)


def test_epsilon_bounds_rejected():
    for eps in (0.0, 1.0, 1.5):
        with pytest.raises(ValidationError, match="epsilon"):
            ni.CoupledLogisticModel(r=4.0, epsilon=eps)


def test_simulation_determinism_bit_identical():
    cfg = ni.GdsConfig(
        graph=chain_dag(3),
        model=ni.CoupledLogisticModel(r=4.0, epsilon=0.4),
        process_noise_std=1e-3, obs_noise_std=1e-3,
        n=500, burn_in=100, seed=42,
    )
    a = ni.simulate_coupled_logistic(cfg)
    b = ni.simulate_coupled_logistic(cfg)
    assert np.array_equal(a.observations.series, b.observations.series)
    assert np.array_equal(a.states, b.states)
    assert a.truth.parents == b.truth.parents


def test_noiseless_matches_scalar_logistic_oracle():
    cfg = ni.GdsConfig(
        graph=ni.Dag.empty(2),
        model=ni.CoupledLogisticModel(r=3.7, epsilon=0.3),
        n=50, burn_in=0, seed=5,
    )
    out = ni.simulate_coupled_logistic(cfg)
    rng = np.random.default_rng(5)
    x = rng.uniform(0.0, 1.0, size=2)
    for i in range(2):
        z = x[i]
        for t in range(50):
            z = 3.7 * z * (1.0 - z)
            assert out.states[i, t] == z


def test_states_stay_in_unit_interval_under_noise():
    cfg = ni.GdsConfig(
        graph=chain_dag(2),
        model=ni.CoupledLogisticModel(r=4.0, epsilon=0.4),
        process_noise_std=0.05, obs_noise_std=0.0,
        n=2000, burn_in=0, seed=6,
    )
    out = ni.simulate_coupled_logistic(cfg)
    assert out.states.min() >= 0.0
    assert out.states.max() <= 1.0


def test_observation_shape_and_truth_echo():
    cfg = ni.GdsConfig(
        graph=chain_dag(3),
        model=ni.CoupledLogisticModel(),
        n=123, burn_in=7, seed=1,
    )
    out = ni.simulate_coupled_logistic(cfg)
    assert out.observations.n == 123
    assert out.observations.m == 3
    assert out.truth.parents == cfg.graph.parents
    assert out.config_echo == cfg


def test_te_directionality_along_true_edges():
    hits = 0
    for trial in range(100):
        cfg = ni.GdsConfig(
            graph=chain_dag(2),
            model=ni.CoupledLogisticModel(r=4.0, epsilon=0.3),
            process_noise_std=1e-3, obs_noise_std=1e-3,
            n=2000, burn_in=500, seed=1000 + trial,
        )
        out = ni.simulate_coupled_logistic(cfg)
        disc = ni.discretize(out.observations, 4)
        view = ni.delay_embed(disc, ni.EmbeddingSpec.uniform(2, 1, 1))
        fwd = ni.collective_transfer_entropy(1, [0], view, DISCRETE)
        rev = ni.collective_transfer_entropy(0, [1], view, DISCRETE)
        hits += fwd > rev
    assert hits >= 90


# ---------------------------------------------------------------------------
# linear gaussian

def test_linear_white_noise_is_uncorrelated():
    cfg = ni.GdsConfig(
        graph=ni.Dag.empty(2),
        model=ni.LinearGaussianModel(coupling=((0.0, 0.0), (0.0, 0.0)),
                                     self_weight=0.0),
        process_noise_std=1.0, obs_noise_std=0.0,
        n=10000, burn_in=10, seed=2,
    )
    out = ni.simulate_linear_gaussian(cfg)
    for i in range(2):
        x = out.observations.series[i]
        ac1 = np.corrcoef(x[:-1], x[1:])[0, 1]
        assert abs(ac1) < 0.05


def test_linear_nonstationary_rejected():
    cfg = ni.GdsConfig(
        graph=ni.Dag.empty(1),
        model=ni.LinearGaussianModel(coupling=((0.0,),), self_weight=1.01),
        process_noise_std=1.0, n=100, seed=0,
    )
    with pytest.raises(ValidationError, match="nonstationary"):
        ni.simulate_linear_gaussian(cfg)


def test_linear_coupling_must_match_graph():
    cfg = ni.GdsConfig(
        graph=ni.Dag.empty(2),
        model=ni.LinearGaussianModel(coupling=((0.0, 0.0), (0.5, 0.0)),
                                     self_weight=0.0),
        process_noise_std=1.0, n=100, seed=0,
    )
    with pytest.raises(ValidationError, match="no .*edge"):
        ni.simulate_linear_gaussian(cfg)


def test_correlation_0_05_pair():
    rho = 0.05
    w = rho / math.sqrt(1.0 - rho * rho)
    cfg = ni.GdsConfig(
        graph=ni.Dag.from_edges(2, [(0, 1)]),
        model=ni.LinearGaussianModel(coupling=((0.0, 0.0), (w, 0.0)),
                                     self_weight=0.0),
        process_noise_std=1.0, obs_noise_std=0.0,
        n=10000, burn_in=100, seed=3,
    )
    out = ni.simulate_linear_gaussian(cfg)
    x1 = out.observations.series[0]
    x2 = out.observations.series[1]
    lagged = np.corrcoef(x1[:-1], x2[1:])[0, 1]
    assert lagged == pytest.approx(rho, abs=0.02)
