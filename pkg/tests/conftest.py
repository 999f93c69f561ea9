import numpy as np
import pytest
from hypothesis import strategies as st

from hittime.chain import MarkovChain, ReferencePair
from hittime.models import build_h_model, h_model_pair

ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance(request):
    """Record one summary line per acceptance criterion."""
    def record(number, checks):
        ok = all(c[0] for c in checks.values())
        detail = "; ".join(f"{k}={v[1]}{'' if v[0] else ' (FAIL)'}" for k, v in checks.items())
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        request.config.stash[ACCEPTANCE_LINES].append(line)
        print(line)
        return ok, line
    return record


def random_chain(seed, metastable=False):
    """Seeded random irreducible chain with 3..15 states and a valid pair.

    With ``metastable`` the transitions into ``G`` are damped by a random
    factor in [1e-5, 1e-2], which puts the pair in the small-parameter regime.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 16))
    W = rng.random((n, n)) ** rng.uniform(1, 4 if metastable else 8)
    W *= rng.random((n, n)) < rng.uniform(0.3, 1)
    # a directed cycle keeps every instance irreducible
    W[np.arange(n), (np.arange(n) + 1) % n] += 0.01
    k = int(rng.integers(1, max(2, n // 3) + 1))
    perm = rng.permutation(n)
    G = [int(g) for g in perm[:k]]
    if metastable:
        W[:, G] *= 10 ** rng.uniform(-5, -2)
    P = W / W.sum(axis=1, keepdims=True)
    return MarkovChain.from_dense(P), ReferencePair(int(perm[k]), frozenset(G))


def random_birth_death(seed, n=None):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 16)) if n is None else n
    up = rng.uniform(0.05, 0.5, n)
    down = rng.uniform(0.05, 0.5, n)
    up[-1] = 0.0
    down[0] = 0.0
    return MarkovChain.birth_death(up, down)


@st.composite
def stochastic_matrices(draw, min_n=2, max_n=8):
    """Strictly positive stochastic matrices (hence irreducible)."""
    n = draw(st.integers(min_n, max_n))
    flat = draw(st.lists(st.floats(0.01, 1.0), min_size=n * n, max_size=n * n))
    W = np.array(flat).reshape(n, n)
    return W / W.sum(axis=1, keepdims=True)


@st.composite
def birth_death_params(draw, min_n=3, max_n=12):
    n = draw(st.integers(min_n, max_n))
    up = np.array(draw(st.lists(st.floats(0.01, 0.5), min_size=n, max_size=n)))
    down = np.array(draw(st.lists(st.floats(0.01, 0.5), min_size=n, max_size=n)))
    up[-1] = 0.0
    down[0] = 0.0
    return up, down


@pytest.fixture
def h_model():
    return build_h_model(1e-3, 0.25), h_model_pair()


@pytest.fixture
def fair_walk():
    """Fair walk on {0..4}, holding 1/2 at the ends."""
    up = np.array([0.5, 0.5, 0.5, 0.5, 0.0])
    down = np.array([0.0, 0.5, 0.5, 0.5, 0.5])
    return MarkovChain.birth_death(up, down)


@pytest.fixture
def two_state():
    return MarkovChain.from_dense([[0.7, 0.3], [0.4, 0.6]])
