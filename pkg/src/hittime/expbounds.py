"""Explicit exponential-law envelopes, factorization inequalities and early
exponential behaviour, all evaluated on exact survival probabilities."""

from dataclasses import dataclass, asdict, field
import math

import numpy as np

from .checks import CheckReport
from .config import DEFAULT
from .errors import ConfigError, SmallnessViolated
from .hitting import hit_probabilities, mean_hitting_time
from .linalg import Killed
from .recurrence import RecurrenceCertificate


class _Survival:
    """Exact ``P(tau^z_G > t)`` for every state ``z`` at a fixed set of times.

    Negative times give one; states of ``G`` give zero for ``t >= 0``.
    """

    def __init__(self, chain, G, times, tol=DEFAULT):
        times = sorted({int(t) for t in times if t >= 0})
        K = Killed(chain, G, tol)
        table = np.zeros((len(times), chain.n))
        if K.m and times:
            table[:, K.free] = K.tails(times)
        self._rows = {t: table[j] for j, t in enumerate(times)}
        self._ones = np.ones(chain.n)

    def __call__(self, t):
        t = int(t)
        if t < 0:
            return self._ones
        return self._rows[t]


def compute_c_cbar(chain, pair, R, r, tol=DEFAULT):
    """Early-exit mass ``c = P(tau^{x0}_G <= 2R) + r`` and its root ``cbar``.

    ``cbar`` is the smaller root of ``cbar (1 - cbar) = c`` when ``c <= 1/4``
    and 1 otherwise.
    """
    pair.check(chain)
    s = _Survival(chain, pair.G, [2 * int(R)], tol)
    c = float(1.0 - s(2 * int(R))[pair.x0] + r)
    return c, cbar_of(c)


def cbar_of(c):
    if c > 0.25:
        return 1.0
    return 0.5 - math.sqrt(0.25 - c)


@dataclass(frozen=True)
class ExpBoundParams:
    """Constants of the exponential-law envelope.

    Times are measured in units of ``T = E tau^{x0}_G``: ``recurrence_fraction``
    is ``R/T`` and ``scale_fraction`` is the intermediate scale ``S/T``.
    ``log_slack`` is ``ln(1 + x/(1-x))`` with ``x = c + cbar + r``.  The
    survival ratio ``P(tau > tT) / e^{-t}`` lies between
    ``lower_prefactor * exp(-lower_rate * t)`` and
    ``upper_prefactor * exp(upper_rate * t)``; the ``basin_*`` prefactors
    widen this to starts in the basin of radius ``basin_radius``.
    """

    recurrence_fraction: float
    recurrence_error: float
    scale_fraction: float
    early_mass: float
    early_mass_root: float
    basin_radius: float
    log_slack: float
    short_rate_upper: float
    short_rate_lower: float
    upper_rate: float
    lower_rate: float
    mid_prefactor_upper: float
    mid_prefactor_lower: float
    small_prefactor_upper: float
    small_prefactor_lower: float
    short_prefactor_upper: float
    short_prefactor_lower: float
    upper_prefactor: float
    lower_prefactor: float
    basin_upper_prefactor: float
    basin_lower_prefactor: float

    def to_dict(self):
        return asdict(self)

    def bounds(self, t, basin=False):
        """Lower and upper bounds on ``P(tau > tT)`` at times ``t``."""
        t = np.asarray(t, dtype=float)
        up = self.basin_upper_prefactor if basin else self.upper_prefactor
        lo = self.basin_lower_prefactor if basin else self.lower_prefactor
        return (lo * np.exp(-(1.0 + self.lower_rate) * t),
                up * np.exp(-(1.0 - self.upper_rate) * t))

    def envelope(self, t, basin=False):
        """Pointwise bound on ``|P(tau > tT) - e^{-t}|``."""
        lower, upper = self.bounds(t, basin)
        e = np.exp(-np.asarray(t, dtype=float))
        return np.maximum(upper - e, e - lower)

    def headline(self, t, basin=False):
        """Collapsed ``(C, lam)`` with ``envelope(t) <= C exp(-(1 - lam) t)`` on ``t``."""
        t = np.asarray(t, dtype=float)
        lam = self.upper_rate
        C = float(np.max(self.envelope(t, basin) * np.exp((1.0 - lam) * t)))
        return C, lam


def default_scale_fraction(eps, r):
    return math.sqrt(max(eps, r))


def assemble_envelope(eps, r, c, cbar, eta=None, r0=None, grid_points=1000):
    """Assemble :class:`ExpBoundParams` from ``R/T``, ``r``, ``c`` and ``cbar``.

    Parameters
    ----------
    eps : float
        Recurrence time over mean exit time.
    r : float
        Recurrence error.
    c, cbar : float
        See :func:`compute_c_cbar`.
    eta : float, optional
        Intermediate scale; defaults to ``sqrt(max(eps, r))``.
    r0 : float, optional
        Basin radius for the basin prefactors; defaults to ``r``.
    grid_points : int
        Geometric grid used for the sup/inf over ``(eps, eta]``.

    Raises
    ------
    SmallnessViolated
        Listing every violated precondition.
    """
    eta = default_scale_fraction(eps, r) if eta is None else float(eta)
    r0 = r if r0 is None else float(r0)
    x = c + cbar + r
    bad = []
    if not 0 < eps < eta:
        bad.append(f"need 0 < R/T < eta (R/T={eps:.4g}, eta={eta:.4g})")
    if not eta < 1:
        bad.append(f"need eta < 1 (eta={eta:.4g})")
    if not x < 0.5:
        bad.append(f"need c + cbar + r < 1/2 (got {x:.4g})")
    if not eta + eps + r < 1:
        bad.append(f"need eta + R/T + r < 1 (got {eta + eps + r:.4g})")
    if not r + r0 < 1:
        bad.append(f"need r + r0 < 1 (got {r + r0:.4g})")
    if bad:
        raise SmallnessViolated(bad)

    g_eta = 1.0 / (1.0 + eta - 2 * eps) + r
    h_eta = 1.0 - eta - eps - r
    alpha0 = 1.0 + math.log(g_eta) / eta
    alpha1 = -1.0 - math.log(h_eta) / eta

    t = np.unique(np.concatenate([np.geomspace(eps, eta, grid_points), [eps, eta]]))
    mid_up = float(np.max((1.0 / (1.0 + t - 2 * eps) + r) / g_eta ** (t / eta)))
    # lower bound 1 - t - eps - r on P(tau > tT), measured against h_eta^(t/eta)
    mid_lo = float(np.min((1.0 - t - eps - r) / h_eta ** (t / eta)))
    small_up = math.exp(eps)
    small_lo = 1.0 - (2 * eps + r)
    short_up = max(small_up, mid_up)
    short_lo = min(small_lo, mid_lo)

    delta0 = math.log1p(x / (1.0 - x))
    up = short_up * (1.0 + x / (1.0 - x))
    lo = short_lo * (1.0 - x)
    return ExpBoundParams(
        recurrence_fraction=float(eps), recurrence_error=float(r), scale_fraction=eta,
        early_mass=float(c), early_mass_root=float(cbar), basin_radius=r0,
        log_slack=delta0, short_rate_upper=alpha0, short_rate_lower=alpha1,
        upper_rate=alpha0 + delta0 / eta, lower_rate=alpha1 + delta0 / eta,
        mid_prefactor_upper=mid_up, mid_prefactor_lower=mid_lo,
        small_prefactor_upper=small_up, small_prefactor_lower=small_lo,
        short_prefactor_upper=short_up, short_prefactor_lower=short_lo,
        upper_prefactor=up, lower_prefactor=lo,
        basin_upper_prefactor=up * (1.0 + x / (1.0 - x)),
        basin_lower_prefactor=lo * (1.0 - r - r0),
    )


def envelope_for(chain, pair, certificate, repeat=1, eta=None, r0=None, tol=DEFAULT):
    """Envelope constants for a certified pair.

    ``repeat = N`` trades the certificate ``(R, r)`` for ``(N R, r**N)``,
    which follows from the Markov property at multiples of ``R``.
    """
    if int(repeat) != repeat or repeat < 1:
        raise ConfigError("repeat must be a positive integer")
    T = mean_hitting_time(chain, pair.x0, pair.G, tol)
    R = int(certificate.R) * int(repeat)
    r = float(certificate.r) ** int(repeat)
    c, cbar = compute_c_cbar(chain, pair, R, r, tol)
    return assemble_envelope(R / T, r, c, cbar, eta=eta, r0=r0), T


@dataclass
class DeviationReport:
    """Measured ``|P(tau/T > t) - e^{-t}|`` against the envelope on a grid."""

    t: np.ndarray
    survival: np.ndarray
    measured: np.ndarray
    envelope: np.ndarray
    start: int
    params: ExpBoundParams
    mean_time: float
    headline: tuple
    basin: list = field(default_factory=list)

    @property
    def ratio(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.envelope > 0, self.measured / self.envelope,
                            np.where(self.measured > 0, np.inf, 0.0))

    @property
    def max_ratio(self):
        return float(np.max(self.ratio))

    @property
    def worst_t(self):
        return float(self.t[int(np.argmax(self.ratio))])

    @property
    def max_deviation(self):
        return float(np.max(self.measured))

    @property
    def passed(self):
        own = bool(np.all(self.measured <= self.envelope))
        return own and all(b["passed"] for b in self.basin)

    def to_dict(self, full=False):
        d = {"start": self.start, "mean_time": self.mean_time,
             "passed": self.passed, "max_ratio": self.max_ratio,
             "worst_t": self.worst_t, "max_deviation": self.max_deviation,
             "headline": {"C": self.headline[0], "lambda": self.headline[1]},
             "params": self.params.to_dict(), "basin": self.basin}
        if full:
            d.update(t=self.t.tolist(), survival=self.survival.tolist(),
                     measured=self.measured.tolist(),
                     envelope=self.envelope.tolist())
        return d


def default_t_grid(points=200, t_max=20.0):
    return np.linspace(t_max / points, t_max, points)


def verify_exponential_law(chain, pair, certificate, t_grid=None, from_basin=False,
                           r0=None, repeat=1, eta=None, tol=DEFAULT):
    """Compare the exact law of ``tau^{x0}_G / T`` with the envelope.

    Real times ``t T`` are floored to integers.  With ``from_basin`` every
    state of the basin of radius ``r0`` (default ``r``) is also checked
    against the widened basin envelope.
    """
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    if t.size == 0 or np.any(t <= 0):
        raise ConfigError("t grid must be nonempty and positive")
    params, T = envelope_for(chain, pair, certificate, repeat, eta, r0, tol)
    times = np.floor(t * T).astype(np.int64)
    s = _Survival(chain, pair.G, times, tol)
    table = np.array([s(k) for k in times])
    e = np.exp(-t)
    measured = np.abs(table[:, pair.x0] - e)
    env = params.envelope(t)
    basin_rows = []
    if from_basin:
        values = hit_probabilities(chain, {pair.x0}, pair.G, tol)
        members = np.flatnonzero(values > 1.0 - params.basin_radius)
        wide = params.envelope(t, basin=True)
        for z in members:
            dev = np.abs(table[:, z] - e)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(wide > 0, dev / wide, np.inf)
            basin_rows.append({"start": int(z), "passed": bool(np.all(dev <= wide)),
                               "max_ratio": float(np.max(ratio)),
                               "max_deviation": float(np.max(dev))})
    return DeviationReport(t, table[:, pair.x0].copy(), measured, env, pair.x0, params, T,
                           params.headline(t), basin_rows)


def _add_worst(report, name, lhs, rhs, states, tolerance, informational=False, **ctx):
    """Record the state with the least slack among ``states``."""
    states = np.asarray(sorted(states), dtype=np.int64)
    if states.size == 0:
        return
    lhs, rhs = np.broadcast_arrays(np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float))
    slack = rhs[states] - lhs[states]
    j = int(np.argmin(slack))
    z = int(states[j])
    report.add(name, lhs[z], rhs[z], tolerance, informational, z=z, **ctx)


def default_lemma_grid(R, S, T, points=20):
    lo = 2.0 * R / S
    hi = max(3.0 * T / S, 4.0 * lo)
    g = np.geomspace(lo, hi, points)
    return g, g


def lemma_suite(chain, pair, certificate, S=None, grid=None, r0=None,
                max_power=50, tolerance=1e-10, tol=DEFAULT):
    """Evaluate the factorization and short-time inequalities exactly.

    Parameters
    ----------
    certificate : RecurrenceCertificate
    S : int, optional
        Scale, must exceed ``R``; defaults to ``10 R``.
    grid : (ts, ss), optional
        Values of ``t`` and ``s`` (all pairs are used); every ``s`` must
        exceed ``R/S``.  Times ``tS`` and ``sS`` are floored.
    r0 : float, optional
        Basin radius for the sandwich and basin checks; defaults to ``r``.

    Returns
    -------
    CheckReport
        One check per inequality instance, recording the start state with
        the least slack.
    """
    if not isinstance(certificate, RecurrenceCertificate):
        raise ConfigError("a RecurrenceCertificate is required")
    pair.check(chain)
    R, r = int(certificate.R), float(certificate.r)
    T = mean_hitting_time(chain, pair.x0, pair.G, tol)
    S = 10 * R if S is None else int(S)
    if S <= R:
        raise ConfigError(f"scale S={S} must exceed R={R}")
    ts, ss = default_lemma_grid(R, S, T) if grid is None else map(np.asarray, grid)
    ts, ss = np.atleast_1d(ts).astype(float), np.atleast_1d(ss).astype(float)
    if np.any(ts <= 0):
        raise ConfigError("t values must be positive")
    if np.any(ss <= R / S):
        raise ConfigError(f"s values must exceed R/S = {R / S:.4g}")
    r0 = r if r0 is None else float(r0)
    x0 = pair.x0
    free = [z for z in range(chain.n) if z not in pair.G]
    hits = hit_probabilities(chain, {x0}, pair.G, tol)

    def ball(radius):
        return [z for z in free if hits[z] > 1.0 - radius]

    A = np.floor(ts * S).astype(np.int64)
    B = np.floor(ss * S).astype(np.int64)
    scales = sorted({S, int(T // 10)} | {int(v) for v in np.geomspace(R + 1, max(T - 1, R + 2), 12)})
    scales = [u for u in scales if R < u < T]
    ks = np.arange(1, max_power + 1)
    claim_times = np.floor(np.geomspace(0.01, 5.0, 20) * T).astype(np.int64)

    times = {0, 2 * R, S, S - R, S + R}
    for a in A:
        times.update((a, a + R, a - R))
        times.update(a + B)
    times.update(B)
    for u in scales:
        times.update((u, u + R, u - R))
    times.update(ks * S)
    times.update(claim_times)
    s = _Survival(chain, pair.G, times, tol)

    rep = CheckReport()
    c = float(1.0 - s(2 * R)[x0] + r)
    cbar = cbar_of(c)
    x = c + cbar + r

    if 2 * R < T:
        rep.add("early_mass_bound", c, 3 * R / T + 2 * r, tolerance)

    # two-time factorization
    for a in A:
        for b in B:
            ctx = {"a": int(a), "b": int(b)}
            lhs = s(a + b)
            _add_worst(rep, "factorization_lower",
                       (s(a + R) - r * s(a)) * s(b)[x0], lhs, free, tolerance, **ctx)
            rep.add("factorization_upper_at_start", lhs[x0],
                    (s(a - R)[x0] + r) * s(b)[x0], tolerance, **ctx)
            _add_worst(rep, "factorization_upper", lhs,
                       s(b) * (s(a - R)[x0] + r), free, tolerance, **ctx)

    # iterated factorization at scale S
    base_up = s(S - R)[x0] + r
    base_lo = s(S + R)[x0] - r
    for k in ks[1:]:
        val = s(k * S)[x0]
        rep.add("iterated_upper", val, base_up ** k, tolerance, k=int(k))
        if base_lo >= 0:
            rep.add("iterated_lower", base_lo ** k, val, tolerance, k=int(k))
    if base_lo < 0:
        rep.skip("iterated_lower", "P(tau > S + R) < r")

    # short-time bounds
    for u in scales:
        F = 1.0 - s(u)[x0]
        rep.add("short_time_upper", F, (u + R) / T + r, tolerance, S=u)
        if u > 2 * R:
            rep.add("short_time_lower", 1.0 / (1.0 + T / (u - 2 * R)) - r, F, tolerance, S=u)
        rep.add("short_time_additive", abs(F - u / T), 2 * R / T + (u / T) ** 2 + r,
                tolerance, S=u)
    if not scales:
        rep.skip("short_time_upper", "no scale strictly between R and T")

    # one-step shift by R
    shift_scales = sorted(set(scales) | {int(a) for a in A if a > R})
    radii = {"short_shift_lower_basin": cbar - c, "short_shift_lower_basin_alt": c - cbar}
    for u in shift_scales:
        _add_worst(rep, "short_shift_upper", 1.0 - s(u + R),
                   (1.0 - s(u)) + c, free, tolerance, S=u)
        for name, radius in radii.items():
            members = ball(radius) if radius > 0 else []
            if members:
                _add_worst(rep, name, s(u) * (1.0 - c - cbar), s(u + R), members,
                           tolerance, S=u, radius=radius)
            else:
                rep.skip(name, f"empty basin at radius {radius:.3g}")

    # multiplicative factorization
    if x < 1:
        near = ball(r)
        for a in A:
            for b in B:
                ctx = {"a": int(a), "b": int(b)}
                lhs = s(a + b)
                prod = s(a) * s(b)[x0]
                if near:
                    _add_worst(rep, "multiplicative_lower_basin", (1.0 - x) * prod, lhs,
                               near, tolerance, **ctx)
                _add_worst(rep, "multiplicative_upper", lhs, (1.0 + x / (1.0 - x)) * prod,
                           free, tolerance, **ctx)
    else:
        rep.skip("multiplicative_lower_basin", "c + cbar + r >= 1")
        rep.skip("multiplicative_upper", "c + cbar + r >= 1")

    if x < 0.5:
        delta0 = math.log1p(x / (1.0 - x))
        p = s(S)[x0]
        for k in ks:
            val = s(k * S)[x0]
            rep.add("geometric_tail_lower", math.exp(-delta0 * k) * p**k, val, tolerance, k=int(k))
            rep.add("geometric_tail_upper", val, math.exp(delta0 * k) * p**k, tolerance, k=int(k))
    else:
        rep.skip("geometric_tail_lower", "c + cbar + r >= 1/2")
        rep.skip("geometric_tail_upper", "c + cbar + r >= 1/2")

    # basin starts against the reference start
    if R < T:
        members = ball(r0)
        for k in sorted(set(claim_times.tolist()) | set(A.tolist())):
            v = s(k)
            _add_worst(rep, "basin_survival_lower", v[x0] * (1.0 - r - r0), v, members,
                       tolerance, time=int(k))
            _add_worst(rep, "basin_survival_upper", v, v[x0] * (1.0 + r), members,
                       tolerance, informational=True, time=int(k))

    if x < 1 and r0 <= r and r + r0 < 1:
        members = ball(r0)
        lo, hi = (1.0 - x) / (1.0 + r), (1.0 + x / (1.0 - x)) / (1.0 - r - r0)
        for a in A:
            for b in B:
                ctx = {"a": int(a), "b": int(b)}
                prod = s(a) * s(b)
                _add_worst(rep, "sandwich_lower", lo * prod, s(a + b), members,
                           tolerance, **ctx)
                _add_worst(rep, "sandwich_upper", s(a + b), hi * prod, members,
                           tolerance, **ctx)
    else:
        rep.skip("sandwich_lower", "needs c + cbar + r < 1, r0 <= r, r + r0 < 1")
    return rep


def ee_check(chain, pair, S, tol=DEFAULT):
    """Largest relative deviation from cell-wise geometric factorization at scale ``S``.

    Returns ``max_k |P(tau in (kS, (k+1)S]) / (P(tau > S)^k P(tau <= S)) - 1|``
    over ``k >= 1`` with ``kS <= E tau``.
    """
    table = density_profile(chain, pair, S, tol)
    a = table["a"][1:]
    return float(np.max(np.abs(a))) if a.size else 0.0


def density_profile(chain, pair, S, tol=DEFAULT):
    """Cell masses at scale ``S`` and their geometric decomposition.

    Returns a dict of arrays over ``k = 0..floor(T/S)``: ``mass`` (exact cell
    probability), ``a`` (relative deviation from the geometric cell mass),
    ``density`` (``e^{-lam k}(1 - e^{-lam})(1 + a_k) / (S/T)``) and
    ``geometric_density`` (the same without ``a_k``), plus scalars ``rate``
    (``lam = -ln P(tau > S)``) and ``remainder`` (mass beyond the last cell).
    """
    pair.check(chain)
    S = int(S)
    if S < 1:
        raise ConfigError("scale must be a positive integer")
    T = mean_hitting_time(chain, pair.x0, pair.G, tol)
    if S > T:
        raise ConfigError(f"scale {S} exceeds the mean exit time {T:.4g}")
    kmax = int(math.floor(T / S))
    k = np.arange(kmax + 1)
    s = _Survival(chain, pair.G, np.concatenate([k * S, (k + 1) * S]), tol)
    surv = np.array([s(j * S)[pair.x0] for j in range(kmax + 2)])
    mass = surv[:-1] - surv[1:]
    pS = surv[1]
    lam = -math.log(pS) if pS > 0 else math.inf
    geom = pS**k * (1.0 - pS)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(geom > 0, mass / geom - 1.0, np.nan)
    width = S / T
    return {"k": k, "mass": mass, "a": a, "rate": lam,
            "density": np.exp(-lam * k) * (1.0 - math.exp(-lam)) * (1.0 + a) / width,
            "geometric_density": np.exp(-lam * k) * (1.0 - math.exp(-lam)) / width,
            "remainder": float(surv[-1])}
