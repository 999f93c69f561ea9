"""Trajectory sampling of hitting times, used only to cross-check exact results.

Samples are generated in fixed blocks of ``BLOCK`` trajectories.  Block ``b``
draws from ``PCG64(SeedSequence([seed, b]))``, so the output depends only on
the seed and the sample count, never on how blocks are spread over workers.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
import csv
import math
import warnings

import numpy as np

from .config import DEFAULT
from .errors import ConfigError, TargetUnreachable, TrajectoryCap
from .hitting import _as_set, mean_hitting_time

BLOCK = 1 << 14
SCHEME = f"pcg64-block{BLOCK}-v1"
CAP_FACTOR = 10**4


@dataclass
class SampleSet:
    """Simulated hitting times.

    ``censored[i]`` marks trajectories stopped at ``cap`` before reaching the
    target; their ``times`` entry equals the cap.
    """

    seed: int
    start: int
    target: frozenset
    times: np.ndarray
    censored: np.ndarray
    cap: int
    scheme: str = SCHEME

    @property
    def count(self):
        return self.times.size

    def mean(self):
        return float(self.times.mean())

    def survival(self, t):
        """Empirical ``P(tau > t)`` at integer times ``t``."""
        srt = np.sort(self.times)
        t = np.asarray(t)
        return 1.0 - np.searchsorted(srt, t, side="right") / srt.size

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", "time", "censored"])
            for i, (t, c) in enumerate(zip(self.times.tolist(), self.censored.tolist())):
                w.writerow([i, t, int(c)])

    def to_npy(self, path):
        np.save(path, self.times.astype("<i8"), allow_pickle=False)

    def metadata(self):
        return {"seed": self.seed, "start": self.start, "target": sorted(self.target),
                "count": self.count, "censored": int(self.censored.sum()),
                "cap": self.cap, "scheme": self.scheme}


class _JumpTable:
    """Holding probabilities and jump-chain lookup for vectorized stepping.

    States that cannot move get escape probability 1 and a jump to
    themselves; the sampler charges them the full cap instead.
    """

    def __init__(self, chain):
        self.n = chain.n
        escape = chain.escape()
        self.stuck = escape <= 0
        self.escape = np.where(self.stuck, 1.0, escape)
        self.p_up = None
        self.flat = None
        if chain.is_tridiagonal:
            self.p_up = np.where(self.stuck, 0.0, chain.up / self.escape)
        else:
            J = chain.dense().copy()
            np.fill_diagonal(J, 0.0)
            J[self.stuck, self.stuck] = 1.0
            cum = np.cumsum(J, axis=1)
            cum /= cum[:, -1:]
            # rows offset by their index give one increasing search array
            self.flat = (cum + np.arange(self.n)[:, None]).ravel()

    def jump(self, x, u):
        if self.p_up is not None:
            return np.where(u < self.p_up[x], x + 1, x - 1)
        return np.searchsorted(self.flat, x + u, side="right") - x * self.n


def _simulate_block(args):
    table, start, in_target, size, seed, block, cap = args
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, block])))
    times = np.zeros(size, dtype=np.int64)
    state = np.full(size, start, dtype=np.int64)
    active = np.arange(size)
    any_stuck = bool(table.stuck.any())
    while active.size:
        x = state[active]
        t = times[active] + rng.geometric(table.escape[x])
        if any_stuck:
            t[table.stuck[x]] = cap
        nxt = table.jump(x, rng.random(active.size))
        if table.p_up is not None and any_stuck:
            nxt = np.where(table.stuck[x], x, nxt)
        times[active] = t
        state[active] = nxt
        active = active[~(in_target[nxt] | (t >= cap))]
    censored = (times >= cap) & ~in_target[state]
    return np.minimum(times, cap), censored


def _workers(workers):
    if workers is None:
        return 1
    if int(workers) < 1:
        raise ConfigError("workers must be a positive integer")
    return int(workers)


def sample_hitting_times(chain, start, A, count, seed, cap=None, workers=None, tol=DEFAULT):
    """Simulate ``count`` independent hitting times of ``A`` from ``start``.

    Each trajectory alternates a geometric holding time with a jump of the
    chain conditioned to move.  Trajectories still running after ``cap``
    steps (default ``10**4 * E tau``) are stopped, flagged as censored, and
    reported with a :class:`TrajectoryCap` warning.
    """
    if int(count) != count or count < 1:
        raise ConfigError("count must be a positive integer")
    A = _as_set(A, chain.n)
    if not 0 <= start < chain.n:
        raise ConfigError("start state outside the chain")
    count, seed = int(count), int(seed)
    if start in A:
        return SampleSet(seed, start, A, np.zeros(count, dtype=np.int64),
                         np.zeros(count, dtype=bool), 0)
    if cap is None:
        try:
            cap = int(math.ceil(CAP_FACTOR * mean_hitting_time(chain, start, A, tol)))
        except TargetUnreachable:
            cap = tol.hard_cap
    in_target = np.zeros(chain.n, dtype=bool)
    in_target[list(A)] = True
    table = _JumpTable(chain)
    sizes = [min(BLOCK, count - b * BLOCK) for b in range(-(-count // BLOCK))]
    jobs = [(table, start, in_target, size, seed, b, int(cap)) for b, size in enumerate(sizes)]
    w = _workers(workers)
    if w > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=w) as pool:
            parts = list(pool.map(_simulate_block, jobs))
    else:
        parts = [_simulate_block(j) for j in jobs]
    times = np.concatenate([p[0] for p in parts])
    censored = np.concatenate([p[1] for p in parts])
    if censored.any():
        warnings.warn(f"{int(censored.sum())} trajectories stopped at cap {cap}", TrajectoryCap)
    return SampleSet(seed, start, A, times, censored, int(cap))


def sample_from_curve(curve, count, seed):
    """Inverse-transform draws from an exact survival curve.

    Draws beyond the curve horizon are returned as ``horizon + 1``.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed)])))
    v = 1.0 - rng.random(int(count))
    # first t with P(tau > t) <= v
    return np.searchsorted(-curve.values, -v, side="left").astype(np.int64)


def ks_distance(samples, curve):
    """Sup distance between empirical and exact distribution functions.

    Both functions jump only at integers, so the supremum is taken over
    ``t = 0..horizon``.  Past the horizon both lie in
    ``[min(F_n(H), 1 - P(tau > H)), 1]``, which bounds their gap there.
    """
    x = np.sort(np.asarray(getattr(samples, "times", samples), dtype=np.int64))
    if x.size == 0:
        raise ConfigError("no samples")
    H = curve.horizon
    t = np.arange(H + 1)
    Fn = np.searchsorted(x, t, side="right") / x.size
    F = 1.0 - curve.values
    d = float(np.max(np.abs(Fn - F)))
    if x[-1] > H or curve.values[-1] > 0:
        d = max(d, float(max(1.0 - Fn[-1], curve.values[-1])))
    return d


def dkw_band(count, alpha=0.01):
    """Dvoretzky-Kiefer-Wolfowitz half-width at confidence ``1 - alpha``."""
    if count < 1 or not 0 < alpha < 1:
        raise ConfigError("need count >= 1 and 0 < alpha < 1")
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * count))
