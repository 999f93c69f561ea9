"""Recurrence certificates and basins of attraction."""

from dataclasses import dataclass, asdict
import math

import numpy as np

from .config import DEFAULT
from .errors import ConfigError
from .hitting import hit_probabilities, mean_hitting_time
from .linalg import Killed


@dataclass(frozen=True)
class RecurrenceCertificate:
    """Every start reaches ``{x0} | G`` within ``R`` steps except with probability ``achieved <= r``."""

    R: int
    r: float
    achieved: float
    argmax_state: int

    def to_dict(self):
        return asdict(self)


def _errors_at(K, n, times):
    tails = K.tails(times)
    full = np.zeros((len(times), n))
    full[:, K.free] = tails
    return full


def recurrence_error(chain, pair, R, tol=DEFAULT):
    """``max_x P(tau^x_{{x0} | G} > R)`` and a maximizing state.

    States in ``{x0} | G`` contribute zero.
    """
    if R < 0:
        raise ConfigError("R must be nonnegative")
    pair.check(chain)
    K = Killed(chain, pair.anchor, tol)
    if K.m == 0:
        return 0.0, pair.x0
    row = _errors_at(K, chain.n, [int(R)])[0]
    x = int(np.argmax(row))
    return float(row[x]), x


def recurrence_errors(chain, pair, Rs, tol=DEFAULT):
    """Vectorized :func:`recurrence_error` over several horizons."""
    pair.check(chain)
    K = Killed(chain, pair.anchor, tol)
    if K.m == 0:
        return np.zeros(len(Rs))
    return _errors_at(K, chain.n, np.asarray(Rs, dtype=np.int64)).max(axis=1)


def _search(K, n, accept, cap):
    """Smallest ``R`` in ``[1, cap]`` with ``accept(R, error(R))``.

    ``accept`` must be monotone in ``R`` (false, then true).  Doubling finds
    a bracket, bisection closes it.
    """
    def err(R):
        row = _errors_at(K, n, [R])[0]
        x = int(np.argmax(row))
        return float(row[x]), x

    hi, e_hi = 1, err(1)
    if accept(1, e_hi[0]):
        return 1, e_hi
    lo = 1
    while True:
        if hi >= cap:
            return None
        lo, hi = hi, min(2 * hi, cap)
        e_hi = err(hi)
        if accept(hi, e_hi[0]):
            break
    while hi - lo > 1:
        mid = (lo + hi) // 2
        e_mid = err(mid)
        if accept(mid, e_mid[0]):
            hi, e_hi = mid, e_mid
        else:
            lo = mid
    return hi, e_hi


def minimal_R(chain, pair, r_target, cap=None, tol=DEFAULT):
    """Smallest ``R`` whose recurrence error is at most ``r_target``.

    The search is capped at ten mean exit times; ``None`` is returned when no
    certificate exists below the cap.
    """
    if not 0 < r_target < 1:
        raise ConfigError("r_target must lie in (0, 1)")
    pair.check(chain)
    K = Killed(chain, pair.anchor, tol)
    if K.m == 0:
        return RecurrenceCertificate(1, float(r_target), 0.0, pair.x0)
    if cap is None:
        cap = max(int(math.ceil(10 * mean_hitting_time(chain, pair.x0, pair.G, tol))), 1)
    found = _search(K, chain.n, lambda R, e: e <= r_target, int(cap))
    if found is None:
        return None
    R, (achieved, x) = found
    return RecurrenceCertificate(int(R), float(r_target), achieved, x)


def balanced_certificate(chain, pair, tol=DEFAULT):
    """Smallest ``R`` with ``error(R) <= R / E tau^{x0}_G``; ``r`` is that error.

    Balancing the two error sources keeps ``R/T`` and ``r`` of the same
    order, which is the regime where the exponential envelopes are sharpest.
    """
    pair.check(chain)
    T = mean_hitting_time(chain, pair.x0, pair.G, tol)
    K = Killed(chain, pair.anchor, tol)
    if K.m == 0:
        return RecurrenceCertificate(1, 0.0, 0.0, pair.x0)
    found = _search(K, chain.n, lambda R, e: e <= R / T, max(int(math.ceil(10 * T)), 1))
    if found is None:
        return None
    R, (achieved, x) = found
    return RecurrenceCertificate(int(R), achieved, achieved, x)


@dataclass
class Basin:
    """States that reach ``x0`` before ``G`` with probability above ``1 - r0``."""

    r0: float
    members: frozenset
    values: np.ndarray

    def to_dict(self):
        return {"r0": self.r0, "members": sorted(int(m) for m in self.members),
                "values": self.values.tolist()}


def basin(chain, pair, r0, tol=DEFAULT):
    if not 0 < r0 < 1:
        raise ConfigError("r0 must lie in (0, 1)")
    pair.check(chain)
    values = hit_probabilities(chain, {pair.x0}, pair.G, tol)
    members = frozenset(np.flatnonzero(values > 1.0 - r0).tolist())
    return Basin(float(r0), members, values)
