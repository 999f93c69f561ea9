import json

import numpy as np
import pytest
from hypothesis import given, settings

from hittime.chain import (MarkovChain, ReferencePair, check_reversibility,
                           is_irreducible, stationary_distribution, validate)
from hittime.errors import ConfigError, NotIrreducible, ParamOutOfRange

from conftest import birth_death_params, random_birth_death, stochastic_matrices


def test_birth_death_rows_complete(fair_walk):
    P = fair_walk.dense()
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-15)
    assert P[0, 0] == 0.5 and P[2, 3] == 0.5 and P[4, 4] == 0.5


@pytest.mark.parametrize("up, down", [
    ([0.5, 0.5, 0.1], [0.0, 0.5, 0.5]),   # up at the last state
    ([0.5, 0.5, 0.0], [0.2, 0.5, 0.5]),   # down at the first state
    ([0.6, 0.5, 0.0], [0.0, 0.6, 0.5]),   # row overflow
    ([-0.1, 0.5, 0.0], [0.0, 0.5, 0.5]),
])
def test_birth_death_rejects_bad_rates(up, down):
    with pytest.raises(ParamOutOfRange):
        MarkovChain.birth_death(up, down)


def test_validate_flags_bad_row_sum():
    chain = MarkovChain.from_dense([[0.5, 0.49], [0.5, 0.5]])
    report = validate(chain)
    assert not report.passed
    assert report.bad_rows["row_sums"] == [0]


def test_validate_flags_reducible():
    chain = MarkovChain.from_dense([[1.0, 0.0], [0.5, 0.5]])
    report = validate(chain)
    assert report.checks["row_sums"] and not report.checks["strongly_connected"]
    with pytest.raises(NotIrreducible):
        stationary_distribution(chain)


@pytest.mark.parametrize("chain_factory", [
    lambda: MarkovChain.from_dense([[0.7, 0.3], [0.4, 0.6]]),
    lambda: random_birth_death(3),
])
def test_json_round_trip(tmp_path, chain_factory):
    chain = chain_factory()
    path = tmp_path / "c.json"
    chain.save(path)
    again = MarkovChain.load(path)
    np.testing.assert_array_equal(chain.dense(), again.dense())
    assert again.is_tridiagonal == chain.is_tridiagonal


@pytest.mark.parametrize("payload", [
    {"format": "dense", "rows": []},
    {"n": 2, "format": "weird"},
    {"n": 3, "format": "dense", "rows": [[[0, 1.0]], [[1, 1.0]]]},
    {"n": 2, "up": [0.5]},
])
def test_malformed_json(tmp_path, payload):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(payload))
    with pytest.raises(ConfigError):
        MarkovChain.load(path)


def test_reference_pair_rules():
    with pytest.raises(ConfigError):
        ReferencePair(1, frozenset({1, 2}))
    with pytest.raises(ConfigError):
        ReferencePair(0, frozenset())
    with pytest.raises(ConfigError):
        ReferencePair(0, frozenset({9})).check(MarkovChain.from_dense(np.eye(2) * 0.5 + 0.25))
    assert ReferencePair(0, {2}).anchor == frozenset({0, 2})


def test_two_state_stationary(two_state):
    # pi = (q, p) / (p + q) for the flip chain
    np.testing.assert_allclose(stationary_distribution(two_state), [4 / 7, 3 / 7], rtol=1e-14)


def test_birth_death_stationary_matches_dense_solve():
    chain = random_birth_death(11, n=12)
    dense = MarkovChain.from_dense(chain.dense())
    np.testing.assert_allclose(stationary_distribution(chain), stationary_distribution(dense),
                               rtol=1e-10)


@settings(max_examples=50, deadline=None)
@given(stochastic_matrices())
def test_stationary_is_invariant(P):
    chain = MarkovChain.from_dense(P)
    pi = stationary_distribution(chain)
    assert abs(pi.sum() - 1) < 1e-12
    np.testing.assert_allclose(pi @ P, pi, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(birth_death_params())
def test_birth_death_chains_are_reversible(params):
    chain = MarkovChain.birth_death(*params)
    ok, violation = check_reversibility(chain, stationary_distribution(chain))
    assert ok and violation < 1e-12
    assert validate(chain).passed


def test_cyclic_chain_is_not_reversible():
    P = np.array([[0.1, 0.8, 0.1], [0.1, 0.1, 0.8], [0.8, 0.1, 0.1]])
    chain = MarkovChain.from_dense(P)
    ok, violation = check_reversibility(chain, stationary_distribution(chain))
    assert not ok and violation > 0.1


def test_irreducibility_of_cycle():
    P = np.roll(np.eye(5), 1, axis=1)
    assert is_irreducible(MarkovChain.from_dense(P))


def test_symmetric_two_state():
    chain = MarkovChain.from_dense([[0.5, 0.5], [0.5, 0.5]])
    assert validate(chain).passed
    np.testing.assert_allclose(stationary_distribution(chain), [0.5, 0.5], atol=1e-15)


def test_row_sum_point_nine_fails():
    chain = MarkovChain.from_dense([[0.5, 0.4], [0.5, 0.5]])
    report = validate(chain)
    assert not report.checks["row_sums"] and report.bad_rows["row_sums"] == [0]


def test_pure_rotation_not_reversible():
    P = np.roll(np.eye(3), 1, axis=1)
    chain = MarkovChain.from_dense(P)
    ok, violation = check_reversibility(chain, np.full(3, 1 / 3))
    assert not ok and violation == pytest.approx(1 / 3)


def test_h_model_detailed_balance_to_rounding():
    from hittime.models import build_h_model
    chain = build_h_model(0.01, 0.25)
    ok, violation = check_reversibility(chain, stationary_distribution(chain))
    assert ok and violation < 1e-15


def test_stationary_against_long_run_occupation():
    # 1000 independent copies for 10^4 steps: 10^7 transitions in total
    rng = np.random.default_rng(2024)
    P = rng.random((6, 6)) + 0.05
    P /= P.sum(axis=1, keepdims=True)
    pi = stationary_distribution(MarkovChain.from_dense(P))
    cum = np.cumsum(P, axis=1)
    cum[:, -1] = 1.0
    x = rng.integers(0, 6, 1000)
    counts = np.zeros(6)
    for step in range(10_000):
        u = rng.random(x.size)
        x = (u[:, None] >= cum[x]).sum(axis=1)
        if step >= 100:
            counts += np.bincount(x, minlength=6)
    np.testing.assert_allclose(counts / counts.sum(), pi, atol=1e-3)


def test_tridiagonal_json_without_format(tmp_path):
    path = tmp_path / "bd.json"
    path.write_text(json.dumps({"n": 3, "up": [0.5, 0.25, 0.0], "down": [0.0, 0.25, 0.5]}))
    chain = MarkovChain.load(path)
    assert chain.is_tridiagonal
    np.testing.assert_allclose(chain.dense()[1], [0.25, 0.5, 0.25])
