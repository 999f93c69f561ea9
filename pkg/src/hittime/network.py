"""Electric-network view of reversible chains.

Edge ``(x, y)`` carries resistance ``r_xy = 1 / (mu(x) P(x, y))``.  The
measure is kept as unnormalized weights ``w`` with normalization ``Z``, so
``mu = w / Z`` and every resistance is ``Z`` times a weight-only quantity.
Observable combinations such as ``mu(x) R`` do not depend on ``Z``.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.sparse import csr_matrix, diags
from scipy.sparse.linalg import spsolve

from .chain import check_reversibility, stationary_distribution
from .config import DEFAULT
from .errors import ConfigError, NotBirthDeath, NotReversible
from .hitting import _as_set, green_diagonal


@dataclass
class ResistorNetwork:
    """Resistances of a reversible chain.

    Attributes
    ----------
    weights : ndarray
        Unnormalized stationary weights ``w``.
    Z : float
        ``sum(w)``; the stationary law is ``w / Z``.
    conductance : scipy.sparse.csr_matrix
        Symmetric matrix of ``w(x) P(x, y)`` (self-loops dropped), i.e. ``Z``
        times the edge conductances.
    path : ndarray or None
        For birth-death chains, ``path[k] = r_{k,k+1}``.
    """

    weights: np.ndarray
    Z: float
    conductance: csr_matrix
    path: np.ndarray = None

    @property
    def n(self):
        return self.weights.size

    @property
    def measure(self):
        return self.weights / self.Z

    def resistance(self, x, y):
        """Edge resistance ``r_xy``; ``inf`` off the support."""
        g = self.conductance[x, y]
        return self.Z / g if g > 0 else math.inf

    def edges(self):
        """Iterator over ``(x, y, r_xy)`` with ``x < y``."""
        C = self.conductance.tocoo()
        for x, y, g in zip(C.row, C.col, C.data):
            if x < y:
                yield int(x), int(y), self.Z / g


def edge_resistances(chain, mu=None, tol=DEFAULT):
    """Resistor network of a reversible chain.

    Parameters
    ----------
    mu : array_like, optional
        Reversible measure, normalized or not; defaults to the stationary law.

    Raises
    ------
    NotReversible
        If detailed balance fails beyond ``tol.structural`` (after normalizing).
    """
    if mu is None:
        w = stationary_distribution(chain, tol)
    else:
        w = np.asarray(mu, dtype=float)
        if w.shape != (chain.n,) or np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ConfigError("measure must be a positive vector of length n")
    Z = float(w.sum())
    ok, violation = check_reversibility(chain, w / Z, tol)
    if not ok:
        raise NotReversible(f"detailed balance violated by {violation:.3e}")
    if chain.is_tridiagonal:
        flow = w[:-1] * chain.up[:-1]
        k = np.arange(chain.n - 1)
        keep = flow > 0
        C = csr_matrix((np.concatenate([flow[keep], flow[keep]]),
                        (np.concatenate([k[keep], k[keep] + 1]),
                         np.concatenate([k[keep] + 1, k[keep]]))), shape=(chain.n, chain.n))
        with np.errstate(divide="ignore"):
            path = Z / flow
    else:
        F = w[:, None] * chain.dense()
        np.fill_diagonal(F, 0.0)
        # symmetrize away rounding; the check above bounds the asymmetry
        C = csr_matrix(0.5 * (F + F.T))
        path = None
    C.eliminate_zeros()
    return ResistorNetwork(w, Z, C, path)


def _require_path(network):
    if network.path is None:
        raise NotBirthDeath("series formulas need a birth-death chain")
    return network.path


def series_resistances(network):
    """Resistances to the two ends of a birth-death chain.

    Returns ``(R0, RL)`` where ``R0[x] = sum_{k < x} r_k`` is the resistance
    between ``x`` and 0 and ``RL[x] = sum_{k >= x} r_k`` the one between
    ``x`` and the last state.
    """
    r = _require_path(network)
    R0 = np.concatenate([[0.0], np.cumsum(r)])
    RL = np.concatenate([np.cumsum(r[::-1])[::-1], [0.0]])
    return R0, RL


def _laplacian(network):
    C = network.conductance
    return diags(np.asarray(C.sum(axis=1)).ravel()) - C


def voltage(network, x, B, y=None):
    """Potential with ``x`` held at 1 and ``B`` grounded.

    Solves the Dirichlet problem for the network Laplacian.  At states other
    than ``x`` and ``B`` the value equals the probability of reaching ``x``
    before ``B``.  Returns the whole vector, or its value at ``y``.
    """
    B = _as_set(B, network.n)
    if x in B:
        raise ConfigError("source must lie outside the grounded set")
    v = np.zeros(network.n)
    v[x] = 1.0
    inner = np.array([z for z in range(network.n) if z != x and z not in B], dtype=np.int64)
    if inner.size:
        L = _laplacian(network).tocsr()
        A = L[inner][:, inner].tocsc()
        rhs = -L[inner][:, [x]].toarray().ravel()
        v[inner] = np.atleast_1d(spsolve(A, rhs))
    return v if y is None else float(v[y])


def effective_resistance(network, x, B):
    """Total resistance between ``x`` and ``B`` from the Dirichlet solve."""
    v = voltage(network, x, B)
    row = network.conductance.getrow(x)
    current = float(np.dot(row.data, 1.0 - v[row.indices])) / network.Z
    return 1.0 / current if current > 0 else math.inf


def _series_to_set(network, x, B):
    """Parallel combination of the resistances from ``x`` to the nearest
    members of ``B`` on either side (birth-death chains)."""
    R0, _ = series_resistances(network)
    left = [b for b in B if b < x]
    right = [b for b in B if b > x]
    sides = []
    if left:
        sides.append(R0[x] - R0[max(left)])
    if right:
        sides.append(R0[min(right)] - R0[x])
    if len(sides) == 1:
        return sides[0]
    a, b = sides
    return a * b / (a + b)


def total_resistance_vs_green(network, chain, x, B, tol=DEFAULT):
    """Compare the resistance from ``x`` to ``B`` with ``E xi_B^x(x) / mu(x)``.

    Birth-death chains use series and parallel reduction; other chains use
    :func:`effective_resistance`.  The local time comes from an independent
    Green-function computation.

    Returns
    -------
    (resistance, local_time_over_measure, relative_gap)
    """
    B = _as_set(B, network.n)
    if x in B:
        raise ConfigError("x must lie outside B")
    if network.path is not None:
        R = _series_to_set(network, x, B)
    else:
        R = effective_resistance(network, x, B)
    lt = float(green_diagonal(chain, B, tol)[x]) / network.measure[x]
    return float(R), lt, float(abs(R - lt) / max(abs(lt), 1e-300))


def exit_time_by_resistances(network, x, left=0, right=None):
    """``E tau^x`` to leave the interval ``(left, right)`` of a birth-death chain.

    Sums ``mu(k) R_left^{min(x,k)} R_right^{max(x,k)} / R_left^right`` over
    the interior states ``k``, which is the Green function of the interval
    written in resistances.
    """
    R0, _ = series_resistances(network)
    right = network.n - 1 if right is None else int(right)
    if not left < x < right:
        raise ConfigError("need left < x < right")
    k = np.arange(left + 1, right)
    lo = np.minimum(k, x)
    hi = np.maximum(k, x)
    g = (R0[lo] - R0[left]) * (R0[right] - R0[hi]) / (R0[right] - R0[left])
    return float(np.sum(network.measure[k] * g))
