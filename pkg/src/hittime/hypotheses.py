"""Finite-size proxies for the metastability hypotheses and their relations.

Each hypothesis is an asymptotic statement along a family of chains.  On a
finite parameter grid it is judged by the log-log trend of a proxy quantity
(see :func:`evaluate_hypotheses`).
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import itertools
import math
import warnings

import numpy as np

from .checks import CheckReport
from .config import DEFAULT
from .errors import EmptySupremum, InsufficientGrid, ConfigError
from .hitting import (green_diagonal, hit_probabilities, mean_hitting_times,
                      quantile_time)
from .linalg import Killed
from .recurrence import recurrence_error, recurrence_errors

DEFAULT_ZETA = math.exp(-1)


def _interior(chain, pair):
    mask = np.ones(chain.n, dtype=bool)
    mask[list(pair.anchor)] = False
    return mask


def local_time_ratio(chain, pair, tol=DEFAULT):
    """Largest local time of an interior state relative to the one at ``x0``.

    ``max_z E xi^z_{{x0}|G}(z) / E xi^{x0}_G(x0)`` over states outside
    ``{x0} | G``; equivalently a ratio of escape probabilities.  With no
    interior state the result is 0 and :class:`EmptySupremum` is warned.
    """
    pair.check(chain)
    inner = _interior(chain, pair)
    if not inner.any():
        warnings.warn("no state outside {x0} | G", EmptySupremum)
        return 0.0
    num = green_diagonal(chain, pair.anchor, tol)[inner].max()
    return float(num / green_diagonal(chain, pair.G, tol)[pair.x0])


def mean_time_ratio(chain, pair, tol=DEFAULT):
    """``max_z E tau^z_{{x0}|G} / E tau^{x0}_G`` over states outside ``{x0} | G``."""
    pair.check(chain)
    inner = _interior(chain, pair)
    if not inner.any():
        warnings.warn("no state outside {x0} | G", EmptySupremum)
        return 0.0
    num = mean_hitting_times(chain, pair.anchor, tol)[inner].max()
    return float(num / mean_hitting_times(chain, pair.G, tol)[pair.x0])


def metastable_set(chain, G, eps, tol=DEFAULT):
    """States ``x`` outside ``G`` whose pair ``(x, G)`` has mean-time ratio below ``eps``."""
    if eps <= 0:
        raise ConfigError("eps must be positive")
    G = frozenset(G)
    to_G = mean_hitting_times(chain, G, tol)
    members = set()
    for x in range(chain.n):
        if x in G:
            continue
        h = mean_hitting_times(chain, G | {x}, tol)
        h[list(G | {x})] = 0.0
        if h.max() / to_G[x] < eps:
            members.add(x)
    return frozenset(members)


def metastable_set_checks(chain, G, eps, members=None, tol=DEFAULT):
    """Mutual comparability of members of the metastable set.

    For members ``x != y``: the ratio of their mean exit times lies in
    ``[1/(1+eps), 1+eps]`` and each visits the other before ``G`` with
    probability at least ``1 - 2 eps``.
    """
    G = frozenset(G)
    members = metastable_set(chain, G, eps, tol) if members is None else members
    to_G = mean_hitting_times(chain, G, tol)
    report = CheckReport()
    for x, y in itertools.permutations(sorted(members), 2):
        ratio = to_G[x] / to_G[y]
        report.add("metastable.mean_ratio_upper", ratio, 1 + eps, x=x, y=y)
        report.add("metastable.mean_ratio_lower", 1 / (1 + eps), ratio, x=x, y=y)
        visit = hit_probabilities(chain, {x}, G, tol)[y]
        report.add("metastable.visit_before_target", 1 - 2 * eps, visit, x=x, y=y)
    return report


def renewal_identity_gap(chain, x, y, z, tol=DEFAULT):
    """Relative gap in ``E tau_z^y = E tau_{x,z}^y + E tau_z^x P(tau_x^y < tau_z^y)``."""
    lhs = mean_hitting_times(chain, {z}, tol)[y]
    if x == z:
        rhs = lhs
    else:
        rhs = (mean_hitting_times(chain, {x, z}, tol)[y]
               + mean_hitting_times(chain, {z}, tol)[x] * hit_probabilities(chain, {x}, {z}, tol)[y])
    return abs(lhs - rhs) / max(abs(lhs), 1.0)


def theorem_inequality_suite(chain, pair, zeta=DEFAULT_ZETA, certificate=None,
                             Rs=None, size=None, tol=DEFAULT):
    """Finite inequalities behind the implications between the hypotheses.

    Checks, on this one chain:

    * ``max_z P(tau^z_{{x0}|G} > R) <= |X| max_z E xi^z(z) / R`` for each ``R``
      in ``Rs`` (Markov inequality plus local-time decomposition);
    * ``E xi^{x0}_G(x0) <= E tau^{x0}_G``;
    * ``Q(zeta) <= E tau^{x0}_G / zeta``;
    * ``max_z E tau^z_{{x0}|G} <= R (2 + r/(1-r))`` for a certificate ``(R, r)``.
    """
    pair.check(chain)
    size = chain.n if size is None else size
    report = CheckReport()
    T = mean_hitting_times(chain, pair.G, tol)[pair.x0]
    TLT = green_diagonal(chain, pair.G, tol)[pair.x0]
    inner = _interior(chain, pair)
    if inner.any():
        lt_max = green_diagonal(chain, pair.anchor, tol)[inner].max()
        sup_mean = mean_hitting_times(chain, pair.anchor, tol)[inner].max()
    else:
        lt_max = sup_mean = 0.0
    if Rs is None:
        top = max(int(T), 1)
        Rs = sorted({1, 2, 5, 10, max(top // 10, 1), max(top // 2, 1), top})
    errs = recurrence_errors(chain, pair, Rs, tol)
    rel = lambda v: tol.solver_residual * max(abs(v), 1.0)
    for R, e in zip(Rs, errs):
        report.add("recurrence_from_local_times", e, size * lt_max / R, rel(e), R=int(R))
    report.add("local_time_below_mean", TLT, T, rel(T))
    q = quantile_time(chain, pair.x0, pair.G, zeta, tol)
    report.add("quantile_markov_bound", q, T / zeta, rel(T / zeta), zeta=zeta)
    if certificate is not None and certificate.r < 1:
        R, r = certificate.R, certificate.achieved
        report.add("mean_return_from_recurrence", sup_mean, R * (2 + r / (1 - r)),
                   rel(sup_mean), R=R, r=r)
    else:
        report.skip("mean_return_from_recurrence", "no certificate with r < 1")
    return report


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class PointReport:
    """Hypothesis quantities of one chain of a family."""

    param: float
    n_states: int
    size: float
    local_time_ratio: float
    mean_time_ratio: float
    exit_time: float
    local_time_at_start: float
    sup_return_time: float
    sup_local_time: float
    quantile_times: dict = field(default_factory=dict)
    scales: dict = field(default_factory=dict)
    tail_at_scale: dict = field(default_factory=dict)

    def quantities(self):
        """Flat mapping of every tracked quantity (CSV columns)."""
        q = {
            "size": self.size,
            "local_time_ratio": self.local_time_ratio,
            "size_local_time_ratio": self.size * self.local_time_ratio,
            "mean_time_ratio": self.mean_time_ratio,
            "exit_time": self.exit_time,
            "local_time_at_start": self.local_time_at_start,
            "sup_return_time": self.sup_return_time,
            "sup_local_time": self.sup_local_time,
        }
        for z, t in self.quantile_times.items():
            q[f"quantile_time[{z:.6g}]"] = float(t)
        for name, s in self.scales.items():
            for k, v in s.items():
                q[f"{k}[{name}]"] = v
        for name, v in self.tail_at_scale.items():
            q[f"tail_at_scale[{name}]"] = v
        return q

    def to_dict(self):
        return {"param": self.param, "n_states": self.n_states, **self.quantities()}


def evaluate_point(chain, pair, param, zetas=(DEFAULT_ZETA,), size=None,
                   quantiles=True, exact_recurrence=False, tails=False, tol=DEFAULT):
    """Compute every hypothesis quantity for one chain.

    For each time scale ``T_n`` (mean exit time ``E``, local time ``LT`` and,
    if requested, the first quantile ``Q``) the recurrence horizon is the
    geometric mean ``R_n = sqrt(T_n * max_z E tau^z_{{x0}|G})`` and the
    recurrence error is bounded by Markov's inequality,
    ``r_n <= max_z E tau^z / R_n``; with ``exact_recurrence`` it is also
    computed exactly.
    """
    pair.check(chain)
    inner = _interior(chain, pair)
    if not inner.any():
        raise ConfigError("no state outside {x0} | G")
    h_anchor = mean_hitting_times(chain, pair.anchor, tol)
    g_anchor = green_diagonal(chain, pair.anchor, tol)
    T = mean_hitting_times(chain, pair.G, tol)[pair.x0]
    TLT = green_diagonal(chain, pair.G, tol)[pair.x0]
    sup_ret = float(h_anchor[inner].max())
    sup_lt = float(g_anchor[inner].max())
    size = float(chain.n if size is None else size)
    times = {"E": T, "LT": TLT}
    qt = {}
    if quantiles:
        for z in zetas:
            qt[float(z)] = quantile_time(chain, pair.x0, pair.G, z, tol)
        times["Q"] = float(qt[float(zetas[0])])
    scales = {}
    for name, Tn in times.items():
        R = math.sqrt(Tn * sup_ret)
        s = {"R": R, "R_over_T": R / Tn, "r_markov": min(sup_ret / R, 1.0)}
        if exact_recurrence:
            s["r_exact"] = recurrence_error(chain, pair, max(int(math.floor(R)), 1), tol)[0]
        scales[name] = s
    tail = {}
    if tails:
        K = Killed(chain, pair.G, tol)
        i = K.index[pair.x0]
        for name, Tn in times.items():
            tail[name] = float(K.tails([int(math.floor(Tn))])[0, i])
    return PointReport(
        param=float(param), n_states=chain.n, size=size,
        local_time_ratio=sup_lt / TLT, mean_time_ratio=sup_ret / T,
        exit_time=float(T), local_time_at_start=float(TLT),
        sup_return_time=sup_ret, sup_local_time=sup_lt,
        quantile_times=qt, scales=scales, tail_at_scale=tail)


@dataclass
class Fit:
    """Least-squares line through ``(log param, log value)``."""

    slope: float
    intercept: float
    max_rel_residual: float

    def to_dict(self):
        return {"slope": self.slope, "intercept": self.intercept,
                "max_rel_residual": self.max_rel_residual}


def loglog_fit(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        return Fit(math.nan, math.nan, math.nan)
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = np.max(np.abs(np.exp(ly - (slope * lx + intercept)) - 1.0))
    return Fit(float(slope), float(intercept), float(resid))


@dataclass
class FamilySweep:
    """Per-point reports, fits and hypothesis verdicts along a parameter grid.

    ``direction`` is +1 when the asymptotic regime is reached by increasing
    the parameter (e.g. system size) and -1 when by decreasing it (e.g. a
    temperature-like parameter).  A quantity "tends to zero" when its slope
    times ``direction`` is negative.
    """

    param_name: str
    grid: list
    direction: int
    points: list
    fits: dict
    verdicts: dict
    threshold: float
    residual_limit: float
    notes: list = field(default_factory=list)

    def trend(self, key):
        return self.fits[key].slope * self.direction

    def rows(self):
        return [p.to_dict() for p in self.points]

    def to_dict(self):
        return {"param_name": self.param_name, "grid": list(map(float, self.grid)),
                "direction": self.direction, "threshold": self.threshold,
                "residual_limit": self.residual_limit,
                "fits": {k: f.to_dict() for k, f in self.fits.items()},
                "verdicts": self.verdicts, "notes": list(self.notes)}


def _check_grid(grid):
    grid = [float(g) for g in grid]
    if len(grid) < 4:
        raise InsufficientGrid("need at least 4 grid points")
    if any(g <= 0 for g in grid):
        raise InsufficientGrid("grid values must be positive")
    d = np.diff(grid)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise InsufficientGrid("grid must be strictly monotone")
    if max(grid) / min(grid) < 10 * (1 - 1e-12):
        raise InsufficientGrid("grid must span at least one decade")
    return grid


def _run_point(args):
    builder, param, kwargs = args
    chain, pair = builder(param)
    size_fn = kwargs.pop("size_fn", None)
    size = size_fn(param, chain) if size_fn is not None else None
    return evaluate_point(chain, pair, param, size=size, **kwargs)


def evaluate_hypotheses(builder, grid, param_name="param", direction=1,
                        zetas=(DEFAULT_ZETA,), threshold=0.1, residual_limit=0.2,
                        size_fn=None, quantiles=True, exact_recurrence=False,
                        tails=False, workers=1, tol=DEFAULT):
    """Sweep a family of chains and judge each hypothesis by its trend.

    Parameters
    ----------
    builder : callable
        ``builder(param) -> (chain, pair)``; must be picklable when
        ``workers > 1``.
    grid : sequence of float
        At least four strictly monotone positive values spanning a decade.
    direction : {1, -1}
        Whether the asymptotic regime lies at large (+1) or small (-1)
        parameter values.
    size_fn : callable, optional
        ``size_fn(param, chain) -> float`` giving the state-space size that
        multiplies the local-time ratio; defaults to the number of states.

    Returns
    -------
    FamilySweep
        Verdicts: ``A`` needs a decreasing size-weighted local-time ratio
        whose last value is below ``threshold``; ``B`` a decreasing mean-time
        ratio; ``G_E``, ``G_LT``, ``G_Q`` decreasing ``R_n/T_n`` and ``r_n``.
        Every trend also needs a fit residual below ``residual_limit``.
    """
    grid = _check_grid(grid)
    if direction not in (1, -1):
        raise ConfigError("direction must be +1 or -1")
    kwargs = dict(zetas=tuple(zetas), quantiles=quantiles, exact_recurrence=exact_recurrence,
                  tails=tails, tol=tol, size_fn=size_fn)
    jobs = [(builder, g, dict(kwargs)) for g in grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_run_point, jobs))
    else:
        points = [_run_point(j) for j in jobs]
    keys = points[0].quantities().keys()
    fits = {k: loglog_fit(grid, [p.quantities()[k] for p in points]) for k in keys}
    sweep = FamilySweep(param_name, grid, direction, points, fits, {}, threshold, residual_limit)

    def decreasing(key):
        f = fits[key]
        return bool(f.slope * direction < 0 and f.max_rel_residual < residual_limit)

    last = points[np.argmax(np.asarray(grid) * direction)]
    v = {"A": bool(decreasing("size_local_time_ratio")
                   and last.quantities()["size_local_time_ratio"] < threshold),
         "B": decreasing("mean_time_ratio")}
    for name in points[0].scales:
        v[f"G_{name}"] = decreasing(f"R_over_T[{name}]") and decreasing(f"r_markov[{name}]")
    sweep.verdicts = v
    if tails:
        zeta = float(zetas[0])
        for name in points[0].tail_at_scale:
            ok = all(p.tail_at_scale[name] >= zeta for p in points)
            sweep.notes.append(
                f"tail at scale {name} >= zeta at every grid point: {ok}; "
                "uniformity along the family is not certified by a finite grid")
    return sweep


class PresetFamily:
    """Picklable family builder for a named preset with one varying parameter."""

    def __init__(self, preset, param, **fixed):
        self.preset = preset
        self.param = param
        self.fixed = fixed

    def __call__(self, value):
        from .models import build_preset
        kw = dict(self.fixed)
        kw[self.param] = int(round(value)) if self.param == "L" else value
        chain, pair, _ = build_preset(self.preset, **kw)
        return chain, pair

    @property
    def direction(self):
        return 1 if self.param == "L" else -1
