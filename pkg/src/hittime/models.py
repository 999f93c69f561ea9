"""Parametric chain families: the two-well h-model, the abc ladder, and helpers."""

from dataclasses import dataclass
import math

import numpy as np

from .chain import MarkovChain, ReferencePair
from .errors import ParamOutOfRange

PRESET_VERSION = "v1"


@dataclass(frozen=True)
class HModelParams:
    p: float
    h: float

    def __post_init__(self):
        if not (0 < self.p < 1 and 0 < self.h < 1):
            raise ParamOutOfRange("h-model needs 0 < p < 1 and 0 < h < 1")


@dataclass(frozen=True)
class AbcModelParams:
    a: float
    b: float
    c: float
    L: int

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 6:
            raise ParamOutOfRange("abc model needs an integer L >= 6")
        if not (self.b <= self.a and self.b <= self.c):
            raise ParamOutOfRange("abc model needs b <= a and b <= c")
        if min(self.a, self.b, self.c) < 0:
            # L^{-x}/2 would exceed 1/2
            raise ParamOutOfRange("abc exponents must be nonnegative")


# state labels of the h-model
H_STATES = ("0", "1", "2", "G")
H_TARGET = 3


def build_h_model(p, h):
    """Four-state birth-death chain ``0 - 1 - 2 - G``.

    From 0 the chain climbs to 1 with probability ``p**h / 2``; from 1 it
    climbs to 2 with probability ``p**(1-h) / 2``; from 2 it falls into G or
    back to 1 with probability 1/2 each; G climbs back with ``p**2 / 2``.
    """
    HModelParams(p, h)
    up = [p**h / 2, p ** (1 - h) / 2, 0.5, 0.0]
    down = [0.0, 0.5, 0.5, p**2 / 2]
    return MarkovChain.birth_death(up, down)


def h_model_pair():
    """Reference pair used with the h-model: start at 1, target G."""
    return ReferencePair(1, frozenset({H_TARGET}))


def h_model_measure(p, h):
    """Unnormalized equilibrium weights ``(1, p^h, p, 1/p)``."""
    return np.array([1.0, p**h, p, 1.0 / p])


def build_abc_model(a, b, c, L):
    """Birth-death chain on ``0..L`` with a slow exit at 0 and a trap near L.

    The left end leaves 0 with probability ``L**-a / 2``; the bulk is a fair
    walk; from ``L-2`` the chain climbs with ``L**-c / 2`` and falls with
    ``L**-b / 2``; ``L-1`` moves either way with 1/2; ``L`` returns with
    ``L**(-2(a+b+c)) / 2``.
    """
    AbcModelParams(a, b, c, L)
    Lf = float(L)
    up = np.full(L + 1, 0.5)
    down = np.full(L + 1, 0.5)
    up[0] = Lf**-a / 2
    down[0] = 0.0
    up[L - 2] = Lf**-c / 2
    down[L - 2] = Lf**-b / 2
    up[L] = 0.0
    down[L] = Lf ** (-2 * (a + b + c)) / 2
    return MarkovChain.birth_death(up, down)


def abc_pair(L):
    """Reference pair ``(0, {L})``."""
    return ReferencePair(0, frozenset({L}))


def abc_measure(a, b, c, L):
    """Unnormalized equilibrium weights of the abc chain."""
    Lf = float(L)
    w = np.ones(L + 1)
    w[0] = Lf**a
    w[L - 2] = Lf**b
    w[L - 1] = Lf ** (b - c)
    w[L] = Lf ** (2 * a + 3 * b + c)
    return w


def build_birth_death(up, down):
    return MarkovChain.birth_death(up, down)


def build_metropolis(energy, beta, proposal):
    """Metropolis chain for an energy landscape.

    Parameters
    ----------
    energy : array_like, shape (n,)
    beta : float
        Inverse temperature, ``beta >= 0``.
    proposal : array_like, shape (n, n)
        Substochastic proposal matrix; its zero pattern is the neighbour graph.

    Returns
    -------
    MarkovChain
        ``P(x, y) = proposal(x, y) * min(1, exp(-beta (H(y) - H(x))))`` off the
        diagonal, with the self-loop completing each row.
    """
    H = np.asarray(energy, dtype=float)
    K = np.array(proposal, dtype=float)
    if beta < 0:
        raise ParamOutOfRange("beta must be nonnegative")
    np.fill_diagonal(K, 0.0)
    if K.shape != (H.size, H.size) or np.any(K < 0) or np.any(K.sum(axis=1) > 1 + 1e-12):
        raise ParamOutOfRange("proposal must be a substochastic n x n matrix")
    dH = H[None, :] - H[:, None]
    accept = np.exp(-beta * np.clip(dH, 0.0, None))
    P = K * accept
    np.fill_diagonal(P, 1.0 - P.sum(axis=1))
    return MarkovChain.from_dense(P)


def h_model_energy(h):
    return np.array([0.0, h, 1.0, -1.0])


def path_proposal(n):
    """Proposal moving to each path neighbour with probability 1/2."""
    K = np.zeros((n, n))
    i = np.arange(n - 1)
    K[i, i + 1] = 0.5
    K[i + 1, i] = 0.5
    return K


def metropolis_h_model(p, h):
    """The h-model rebuilt as a Metropolis chain with ``beta = -ln p``."""
    return build_metropolis(h_model_energy(h), -math.log(p), path_proposal(4))


PRESETS = {
    "h": {"kind": "h", "defaults": {"p": 0.01, "h": 0.25}},
    "abc": {"kind": "abc", "defaults": {"a": 0.5, "b": 0.25, "c": 0.25, "L": 64}},
    "abc-ex1": {"kind": "abc", "defaults": {"a": 5 / 8, "b": 1 / 4, "c": 7 / 4, "L": 64}},
    "abc-ex2": {"kind": "abc", "defaults": {"a": 0.0, "b": 0.0, "c": 1.5, "L": 64}},
}

# named abc presets fix (a, b, c); only L may be overridden
_FIXED = {"abc-ex1": ("a", "b", "c"), "abc-ex2": ("a", "b", "c")}


def preset_params(name, **overrides):
    if name not in PRESETS:
        raise ParamOutOfRange(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    params = dict(PRESETS[name]["defaults"])
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in params:
            raise ParamOutOfRange(f"preset {name!r} has no parameter {key!r}")
        if key in _FIXED.get(name, ()):
            raise ParamOutOfRange(f"preset {name!r} fixes {key!r}")
        params[key] = value
    if "L" in params:
        params["L"] = int(params["L"])
    return params


def build_preset(name, **overrides):
    """Build a named preset; returns ``(chain, reference_pair, params)``."""
    params = preset_params(name, **overrides)
    if PRESETS[name]["kind"] == "h":
        return build_h_model(params["p"], params["h"]), h_model_pair(), params
    return (build_abc_model(params["a"], params["b"], params["c"], params["L"]),
            abc_pair(params["L"]), params)


def abc_scaling_exponents(a, b, c):
    """Predicted growth exponents in L for the abc chain with pair ``(0, {L})``.

    Returns a dict with

    ``max_local_time``
        exponent of ``max_x E xi^x_{0,L}(x)``: 1 if ``c < 1``, ``c`` if
        ``1 <= c <= b + 1``, ``b + 1`` otherwise.
    ``max_return_time``
        exponent of ``max_x E tau^x_{0,L}``: ``max(2, min(c, b + 1))``.  The
        plateau costs ``L^2``; started at ``L - 2`` the walk pays
        ``L^c`` when ``c <= b + 1`` and ``L^(b+1)`` beyond.
    ``exit_time``
        exponent of ``E tau^0_L`` from ``(L^a + L)(L^{c-b} + L)``.
    ``local_time_at_start``
        exponent of ``E xi^0_L(0) = 2 L^a (L - 2 + 2 L^{c-b})``.
    """
    if c < 1:
        lt = 1.0
    elif c <= b + 1:
        lt = float(c)
    else:
        lt = float(b + 1)
    mt = max(2.0, min(float(c), b + 1.0))
    return {
        "max_local_time": lt,
        "max_return_time": mt,
        "exit_time": max(a, 1.0) + max(c - b, 1.0),
        "local_time_at_start": a + max(1.0, c - b),
    }
