"""Exact hitting-time quantities from linear solves on killed chains."""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from .config import DEFAULT
from .errors import (CurveTooShort, HorizonExceeded, SolverFailure,
                     TargetUnreachable, ConfigError)
from .linalg import Killed


def _as_set(A, n):
    A = frozenset(int(a) for a in np.atleast_1d(np.asarray(list(A) if hasattr(A, "__iter__") else A)))
    if not A:
        raise ConfigError("target set must be nonempty")
    if min(A) < 0 or max(A) >= n:
        raise ConfigError("target set refers to states outside the chain")
    return A


def _reachable_from(chain, start):
    adj = chain.support().tolil().rows
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


def mean_hitting_times(chain, A, tol=DEFAULT):
    """Vector of ``E tau_A^x`` for every state ``x`` (zero on ``A``).

    Solves ``(I - Q_A) h = 1`` on the complement of ``A``.
    """
    A = _as_set(A, chain.n)
    K = Killed(chain, A, tol)
    h = np.zeros(chain.n)
    h[K.free] = K.solve(np.ones(K.m))
    return h


def mean_hitting_time(chain, start, A, tol=DEFAULT):
    """Expected number of steps for the chain started at ``start`` to enter ``A``.

    Raises
    ------
    TargetUnreachable
        If no path leads from ``start`` into ``A``.
    SolverFailure
        If the restricted system is singular for another reason (some state
        reachable from ``start`` cannot reach ``A``) or inaccurate.
    """
    A = _as_set(A, chain.n)
    if start in A:
        return 0.0
    try:
        return float(mean_hitting_times(chain, A, tol)[start])
    except SolverFailure:
        if not (_reachable_from(chain, start) & A):
            raise TargetUnreachable(f"no path from {start} to the target set") from None
        raise


@dataclass
class SurvivalCurve:
    """``values[t] = P(tau > t)`` for ``t = 0..horizon``.

    ``tail_mass_bound`` bounds the omitted sum ``sum_{t > horizon} P(tau > t)``
    from above; ``tail_estimate`` is the geometric extrapolation of the same
    sum from the decay rate over the final window (for reporting only).
    """

    start: int
    target: frozenset
    values: np.ndarray
    tail_mass_bound: float
    tail_estimate: float = 0.0
    truncated: bool = False

    @property
    def horizon(self):
        return self.values.size - 1

    def at(self, t):
        """Survival at integer time(s) ``t``; times past the horizon raise."""
        t = np.asarray(t)
        if np.any(t > self.horizon):
            raise CurveTooShort(f"time beyond horizon {self.horizon}")
        return np.where(t < 0, 1.0, self.values[np.clip(t, 0, None)])


def survival_curve(chain, start, A, threshold=None, cap=None, tol=DEFAULT):
    """Tail function of the hitting time of ``A`` from ``start``.

    Iterates the killed chain until the survival drops below ``threshold``
    (default ``tol.truncation``) or ``cap`` steps (default ``tol.hard_cap``).
    A :class:`HorizonExceeded` warning is issued when the cap is reached
    first; the curve is still returned with ``truncated=True``.
    """
    A = _as_set(A, chain.n)
    threshold = tol.truncation if threshold is None else threshold
    cap = tol.hard_cap if cap is None else int(cap)
    if not 0 < threshold < 1:
        raise ConfigError("threshold must lie in (0, 1)")
    if start in A:
        return SurvivalCurve(start, A, np.zeros(1), 0.0)
    K = Killed(chain, A, tol)
    values, hit_cap = K.start_curve(K.index[start], threshold, cap)
    # the exact sequence is non-increasing; remove last-bit rounding jitter
    values = np.clip(np.minimum.accumulate(values), 0.0, 1.0)
    # sum_{t>H} P(tau>t) = sum_y P(X_H=y, tau>H) E tau^y - P(tau>H)
    #                   <= P(tau>H) (max_y E tau^y - 1)
    h = K.solve(np.ones(K.m))
    s_end = values[-1]
    bound = s_end * max(h.max() - 1.0, 0.0)
    window = min(64, values.size - 1)
    estimate = 0.0
    if window > 0 and values[-1 - window] > 0 and s_end > 0:
        ratio = (s_end / values[-1 - window]) ** (1.0 / window)
        estimate = s_end * ratio / (1.0 - ratio) if ratio < 1 else math.inf
    if hit_cap:
        warnings.warn(f"survival curve reached cap {cap} at level {s_end:.3e}", HorizonExceeded)
    return SurvivalCurve(start, A, values, float(bound), float(estimate), bool(hit_cap))


def quantile(curve, zeta):
    """``inf{k >= 1 : P(tau <= k) >= 1 - zeta}`` read off a survival curve."""
    if not 0 < zeta < 1:
        raise ConfigError("zeta must lie in (0, 1)")
    vals = curve.values
    idx = np.flatnonzero(vals[1:] <= zeta)
    if idx.size == 0:
        raise CurveTooShort(f"curve ends at survival {vals[-1]:.3e} above {zeta}")
    return int(idx[0]) + 1


def quantile_time(chain, start, A, zeta, tol=DEFAULT):
    """Same as :func:`quantile` but without materializing the curve.

    Uses binary lifting on powers of the killed chain, so the cost grows with
    the logarithm of the answer.
    """
    A = _as_set(A, chain.n)
    if not 0 < zeta < 1:
        raise ConfigError("zeta must lie in (0, 1)")
    if start in A:
        return 1
    K = Killed(chain, A, tol)
    mean = K.solve(np.ones(K.m))[K.index[start]]
    # P(tau > k) <= E tau / (k + 1), so k = floor(mean / zeta) already qualifies
    upper = max(int(math.floor(mean / zeta)), 1)
    return min(K.first_time_at_most(K.index[start], zeta, upper), upper)


@dataclass
class GreenTable:
    """``matrix[x, y]``: expected visits to ``y`` before hitting ``taboo`` from ``x``."""

    taboo: frozenset
    matrix: np.ndarray

    def local_time(self, x, y):
        return float(self.matrix[x, y])


def green_function(chain, A, tol=DEFAULT):
    """Dense Green table of the chain killed on ``A``.

    Row sums are compared with an independent mean-hitting solve; a relative
    gap above ``tol.consistency`` raises :class:`SolverFailure`.
    """
    A = _as_set(A, chain.n)
    K = Killed(chain, A, tol)
    g = np.zeros((chain.n, chain.n))
    g[np.ix_(K.free, K.free)] = K.inverse()
    h = mean_hitting_times(chain, A, tol)
    gap = np.max(np.abs(g.sum(axis=1) - h) / np.maximum(h, 1.0))
    if gap > tol.consistency:
        raise SolverFailure(f"Green row sums disagree with mean hitting times ({gap:.2e})")
    return GreenTable(A, g)


def green_diagonal(chain, A, tol=DEFAULT):
    """``E xi_A^x(x)`` for every state (zero on ``A``); O(n) for birth-death chains."""
    A = _as_set(A, chain.n)
    K = Killed(chain, A, tol)
    d = np.zeros(chain.n)
    d[K.free] = K.green_diagonal()
    return d


def green_row(chain, x, A, tol=DEFAULT):
    """Expected visits to every state before hitting ``A``, started at ``x``."""
    A = _as_set(A, chain.n)
    row = np.zeros(chain.n)
    if x in A:
        return row
    K = Killed(chain, A, tol)
    e = np.zeros(K.m)
    e[K.index[x]] = 1.0
    row[K.free] = K.solve(e, transpose=True)
    return row


def hit_probabilities(chain, Y, B, tol=DEFAULT):
    """Harmonic function ``u(x) = P(tau_Y^x < tau_B^x)``; 1 on ``Y``, 0 on ``B``."""
    Y = _as_set(Y, chain.n)
    B = _as_set(B, chain.n)
    if Y & B:
        raise ConfigError("target and taboo sets must be disjoint")
    K = Killed(chain, Y | B, tol)
    inY = np.zeros(chain.n)
    inY[list(Y)] = 1.0
    # one-step probability of landing in Y from each free state
    rhs = chain.apply(inY)[K.free]
    u = inY.copy()
    u[K.free] = K.solve(rhs)
    return u


def taboo_probability(chain, start, Y, B, tol=DEFAULT):
    """``P(first positive visit to Y precedes first positive visit to B)``.

    For ``start`` inside ``Y | B`` one step is taken explicitly before the
    harmonic function is applied.
    """
    u = hit_probabilities(chain, Y, B, tol)
    Y = _as_set(Y, chain.n)
    B = _as_set(B, chain.n)
    if start in Y or start in B:
        cols, probs = chain.row(start)
        return float(np.dot(probs, u[cols]))
    return float(u[start])


def mean_hitting_time_via_local_times(chain, start, A, tol=DEFAULT):
    """Mean hitting time as a sum of local times of the states visited.

    Adds ``E xi_A^y(y) * P(reach y before A)`` over ``y`` outside ``A``; the
    visit to ``start`` at time zero counts with probability one.  This route
    shares no solve with :func:`mean_hitting_time` and is used to cross-check it.
    """
    A = _as_set(A, chain.n)
    if start in A:
        return 0.0
    diag = green_diagonal(chain, A, tol)
    total = 0.0
    for y in range(chain.n):
        if y in A:
            continue
        reach = 1.0 if y == start else hit_probabilities(chain, {y}, A, tol)[start]
        total += diag[y] * reach
    return total


@dataclass
class HittingStats:
    """Mean exit time, quantiles and local time at the start state."""

    mean: float
    quantiles: dict = field(default_factory=dict)
    local_time_at_start: float = 0.0

    def to_dict(self):
        return {"mean": self.mean, "local_time_at_start": self.local_time_at_start,
                "quantiles": {repr(float(z)): int(q) for z, q in self.quantiles.items()}}


def hitting_stats(chain, pair, zetas=(math.exp(-1),), tol=DEFAULT):
    pair.check(chain)
    mean = mean_hitting_time(chain, pair.x0, pair.G, tol)
    lt = float(green_diagonal(chain, pair.G, tol)[pair.x0])
    qs = {float(z): quantile_time(chain, pair.x0, pair.G, z, tol) for z in zetas}
    return HittingStats(mean, qs, lt)
