import numpy as np
import pytest
from hypothesis import given, settings

from hittime.chain import MarkovChain
from hittime.errors import ConfigError, NotBirthDeath, NotReversible
from hittime.hitting import hit_probabilities, mean_hitting_time, mean_hitting_times
from hittime.models import (abc_measure, build_abc_model, build_h_model, build_metropolis,
                            h_model_measure, path_proposal)
from hittime.network import (edge_resistances, effective_resistance, exit_time_by_resistances,
                             series_resistances, total_resistance_vs_green, voltage)

from conftest import birth_death_params, random_birth_death


def _metropolis(seed, n=7):
    rng = np.random.default_rng(seed)
    K = rng.random((n, n)) * (rng.random((n, n)) < 0.6)
    K = np.triu(K, 1)
    K = K + K.T
    K[np.arange(n - 1), np.arange(1, n)] += 0.05   # keep it connected
    K[np.arange(1, n), np.arange(n - 1)] += 0.05
    K /= K.sum(axis=1).max() * 1.01
    return build_metropolis(rng.normal(size=n), 1.5, K)


def test_fair_walk_resistances(fair_walk):
    net = edge_resistances(fair_walk)
    # uniform measure 1/5 and steps of 1/2: every edge carries 10
    np.testing.assert_allclose(net.path, 10.0, rtol=1e-14)
    R0, RL = series_resistances(net)
    np.testing.assert_allclose(R0, [0, 10, 20, 30, 40], rtol=1e-14)
    np.testing.assert_allclose(RL, [40, 30, 20, 10, 0], rtol=1e-14)
    assert effective_resistance(net, 0, {4}) == pytest.approx(40.0, rel=1e-12)
    assert net.resistance(0, 2) == np.inf
    assert sorted(e[:2] for e in net.edges()) == [(0, 1), (1, 2), (2, 3), (3, 4)]


@pytest.mark.parametrize("p, h", [(1e-2, 0.25), (1e-3, 0.5)])
def test_h_model_resistances(p, h):
    net = edge_resistances(build_h_model(p, h))
    Z = h_model_measure(p, h).sum() * net.Z / net.weights.sum()
    np.testing.assert_allclose(net.path, [2 * Z * p**-h, 2 * Z / p, 2 * Z / p], rtol=1e-10)


def test_h_model_resistances_from_given_measure():
    p, h = 1e-3, 0.25
    w = h_model_measure(p, h)
    net = edge_resistances(build_h_model(p, h), mu=w)
    Z = w.sum()
    assert net.Z == Z
    np.testing.assert_allclose(net.path, [2 * Z * p**-h, 2 * Z / p, 2 * Z / p], rtol=1e-14)


@pytest.mark.parametrize("abc", [(0.5, 0.25, 0.25), (5 / 8, 1 / 4, 7 / 4)])
def test_abc_resistances(abc):
    L = 40
    w = abc_measure(*abc, L)
    net = edge_resistances(build_abc_model(*abc, L), mu=w)
    Z = w.sum()
    b, c = abc[1], abc[2]
    expected = np.full(L, 2 * Z)
    expected[L - 2:] = 2 * Z * L ** (c - b)
    np.testing.assert_allclose(net.path, expected, rtol=1e-12)


@pytest.mark.parametrize("seed", range(6))
def test_commute_time_identity(seed):
    chain = _metropolis(seed)
    net = edge_resistances(chain)
    a, b = 0, chain.n - 1
    commute = mean_hitting_time(chain, a, {b}) + mean_hitting_time(chain, b, {a})
    assert effective_resistance(net, a, {b}) == pytest.approx(commute, rel=1e-9)


@pytest.mark.parametrize("seed", range(6))
def test_voltage_is_hitting_probability(seed):
    chain = _metropolis(seed)
    net = edge_resistances(chain)
    B = {chain.n - 1, chain.n - 2}
    np.testing.assert_allclose(voltage(net, 0, B), hit_probabilities(chain, {0}, B), atol=1e-12)
    assert voltage(net, 0, B, y=0) == 1.0


@settings(max_examples=40, deadline=None)
@given(birth_death_params(min_n=4))
def test_series_resistance_equals_local_time(params):
    chain = MarkovChain.birth_death(*params)
    net = edge_resistances(chain)
    n = chain.n
    for x, B in ((1, {0}), (1, {0, n - 1}), (n - 2, {n - 1})):
        R, lt, gap = total_resistance_vs_green(net, chain, x, B)
        assert gap < 1e-9
        assert effective_resistance(net, x, B) == pytest.approx(R, rel=1e-9)


@pytest.mark.parametrize("seed", range(4))
def test_dense_resistance_equals_local_time(seed):
    chain = _metropolis(seed)
    net = edge_resistances(chain)
    R, lt, gap = total_resistance_vs_green(net, chain, 2, {0, chain.n - 1})
    assert gap < 1e-9


@pytest.mark.parametrize("seed", range(6))
def test_exit_time_by_resistances(seed):
    chain = random_birth_death(seed, n=10)
    net = edge_resistances(chain)
    h = mean_hitting_times(chain, {1, 8})
    for x in range(2, 8):
        assert exit_time_by_resistances(net, x, 1, 8) == pytest.approx(h[x], rel=1e-10)
    with pytest.raises(ConfigError):
        exit_time_by_resistances(net, 1, 1, 8)


def test_rejects_irreversible_chain():
    P = np.array([[0.1, 0.8, 0.1], [0.1, 0.1, 0.8], [0.8, 0.1, 0.1]])
    with pytest.raises(NotReversible):
        edge_resistances(MarkovChain.from_dense(P))


def test_rejects_wrong_measure(fair_walk):
    with pytest.raises(ConfigError):
        edge_resistances(fair_walk, mu=[1, 1, 1])
    with pytest.raises(ConfigError):
        edge_resistances(fair_walk, mu=[1, 1, 0, 1, 1])
    with pytest.raises(NotReversible):
        edge_resistances(fair_walk, mu=[1, 2, 1, 2, 1])


def test_series_needs_birth_death():
    net = edge_resistances(_metropolis(0))
    with pytest.raises(NotBirthDeath):
        series_resistances(net)


def test_voltage_source_outside_ground(fair_walk):
    net = edge_resistances(fair_walk)
    with pytest.raises(ConfigError):
        voltage(net, 0, {0})
    with pytest.raises(ConfigError):
        total_resistance_vs_green(net, fair_walk, 0, {0})


def test_metropolis_path_is_birth_death_network():
    chain = build_metropolis([0.0, 0.3, 1.0, -1.0], 2.0, path_proposal(4))
    dense = edge_resistances(chain)
    tri = edge_resistances(MarkovChain.birth_death(
        np.append(np.diag(chain.dense(), 1), 0.0), np.insert(np.diag(chain.dense(), -1), 0, 0.0)))
    for x, y, r in tri.edges():
        assert dense.resistance(x, y) == pytest.approx(r, rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_resistance_symmetric(seed):
    net = edge_resistances(_metropolis(seed))
    for x, y, r in net.edges():
        assert net.resistance(y, x) == r
    for x in range(3):
        for y in range(4, 7):
            assert effective_resistance(net, x, {y}) == pytest.approx(
                effective_resistance(net, y, {x}), rel=1e-10)


@pytest.mark.parametrize("abc", [(5 / 8, 1 / 4, 7 / 4), (0.0, 0.0, 1.5), (0.5, 0.25, 0.5)])
def test_abc_series_resistances_near_the_trap(abc):
    L = 64
    _, b, c = abc
    w = abc_measure(*abc, L)
    net = edge_resistances(build_abc_model(*abc, L), mu=w)
    Z = w.sum()
    R0, RL = series_resistances(net)
    assert R0[L - 1] == pytest.approx(Z * (2 * (L - 2) + 2 * L ** (c - b)), rel=1e-12)
    assert RL[L - 1] == pytest.approx(2 * Z * L ** (c - b), rel=1e-12)


def test_single_edge_chain():
    chain = MarkovChain.birth_death([0.3, 0.0], [0.0, 0.6])
    net = edge_resistances(chain)
    R0, RL = series_resistances(net)
    assert R0[1] == RL[0] == net.path[0]
    assert effective_resistance(net, 0, {1}) == pytest.approx(net.path[0], rel=1e-12)


def test_two_state_resistance_is_inverse_escape_flow(two_state):
    net = edge_resistances(two_state)
    mu0 = net.measure[0]
    R, lt, gap = total_resistance_vs_green(net, two_state, 0, {1})
    # from 0 the chain leaves for 1 at once with probability P(0,1)
    assert R == pytest.approx(1 / (mu0 * two_state.dense()[0, 1]), rel=1e-12)
    assert gap < 1e-12


def test_fair_walk_linear_potential():
    L = 12
    chain = MarkovChain.birth_death([0.5] * L + [0.0], [0.0] + [0.5] * L)
    v = voltage(edge_resistances(chain), L, {0})
    np.testing.assert_allclose(v, np.arange(L + 1) / L, atol=1e-12)


@pytest.mark.parametrize("abc", [(5 / 8, 1 / 4, 7 / 4), (0.0, 0.0, 1.5)])
def test_abc_voltage_matches_taboo_probability(abc):
    from hittime.hitting import taboo_probability
    L = 100
    chain = build_abc_model(*abc, L)
    v = voltage(edge_resistances(chain), L, {0})
    for y in (1, 10, 50, 97, 98, 99):
        assert v[y] == pytest.approx(taboo_probability(chain, y, {L}, {0}), abs=1e-10)
    assert v[L] == 1.0 and v[0] == 0.0
