"""Finite discrete-time Markov chains: storage, validation, equilibrium.

Two storage layouts are supported.  Generic chains keep a dense transition
matrix; birth-death chains keep only their up/down probabilities and never
materialize an n-by-n array unless asked to.
"""

from dataclasses import dataclass, field
import json

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .config import DEFAULT
from .errors import NotIrreducible, SolverFailure, ParamOutOfRange, ConfigError


class MarkovChain:
    """Row-stochastic transition structure over states ``0..n-1``.

    Build with :meth:`from_dense` or :meth:`birth_death`.  Instances are
    treated as immutable; the arrays are flagged read-only.
    """

    def __init__(self, n, matrix=None, up=None, down=None):
        self.n = int(n)
        self._matrix = matrix
        self._up = up
        self._down = down
        for arr in (matrix, up, down):
            if arr is not None:
                arr.flags.writeable = False

    @classmethod
    def from_dense(cls, P):
        P = np.array(P, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
            raise ParamOutOfRange("transition matrix must be square and nonempty")
        return cls(P.shape[0], matrix=P)

    @classmethod
    def birth_death(cls, up, down):
        """Nearest-neighbour chain with ``P(x, x+1) = up[x]``, ``P(x, x-1) = down[x]``.

        The self-loop completes each row.  ``up[-1]`` and ``down[0]`` must be 0.
        """
        up = np.array(up, dtype=float)
        down = np.array(down, dtype=float)
        if up.ndim != 1 or up.shape != down.shape or up.size == 0:
            raise ParamOutOfRange("up and down must be equal-length vectors")
        if up[-1] != 0 or down[0] != 0:
            raise ParamOutOfRange("up[-1] and down[0] must be zero")
        if np.any(up < 0) or np.any(down < 0) or np.any(up + down > 1 + DEFAULT.structural):
            raise ParamOutOfRange("need up, down >= 0 and up + down <= 1")
        return cls(up.size, up=up, down=down)

    @property
    def is_tridiagonal(self):
        return self._up is not None

    @property
    def up(self):
        if not self.is_tridiagonal:
            return np.append(np.diag(self._matrix, 1), 0.0)
        return self._up

    @property
    def down(self):
        if not self.is_tridiagonal:
            return np.insert(np.diag(self._matrix, -1), 0, 0.0)
        return self._down

    def dense(self):
        """Full transition matrix as a fresh array."""
        if self._matrix is not None:
            return self._matrix.copy()
        P = np.diag(1.0 - self._up - self._down)
        idx = np.arange(self.n - 1)
        P[idx, idx + 1] = self._up[:-1]
        P[idx + 1, idx] = self._down[1:]
        return P

    def escape(self):
        """Off-diagonal row sums, i.e. probability of leaving each state.

        Summed from the off-diagonal entries directly so that rows with a
        self-loop close to 1 keep full relative precision.
        """
        if self.is_tridiagonal:
            return self._up + self._down
        off = self._matrix.copy()
        np.fill_diagonal(off, 0.0)
        return off.sum(axis=1)

    def row(self, x):
        """Return (targets, probabilities) of the nonzero entries of row x."""
        if self.is_tridiagonal:
            cols, probs = [], []
            if x > 0 and self._down[x] > 0:
                cols.append(x - 1)
                probs.append(self._down[x])
            stay = 1.0 - self._up[x] - self._down[x]
            if stay > 0:
                cols.append(x)
                probs.append(stay)
            if x < self.n - 1 and self._up[x] > 0:
                cols.append(x + 1)
                probs.append(self._up[x])
            return np.array(cols, dtype=int), np.array(probs)
        r = self._matrix[x]
        cols = np.flatnonzero(r)
        return cols, r[cols]

    def support(self):
        """Sparse adjacency (CSR) of positive off-diagonal transitions."""
        if self.is_tridiagonal:
            idx = np.arange(self.n - 1)
            rows = np.concatenate([idx, idx + 1])
            cols = np.concatenate([idx + 1, idx])
            vals = np.concatenate([self._up[:-1], self._down[1:]])
        else:
            rows, cols = np.nonzero(self._matrix)
            vals = self._matrix[rows, cols]
        keep = (vals > 0) & (rows != cols)
        return csr_matrix((np.ones(keep.sum()), (rows[keep], cols[keep])), shape=(self.n, self.n))

    def step_distribution(self, v):
        """One step of the chain applied to a row vector: ``v @ P``."""
        v = np.asarray(v, dtype=float)
        if self.is_tridiagonal:
            out = v * (1.0 - self._up - self._down)
            out[1:] += v[:-1] * self._up[:-1]
            out[:-1] += v[1:] * self._down[1:]
            return out
        return v @ self._matrix

    def apply(self, u):
        """``P @ u`` for a column vector ``u``."""
        u = np.asarray(u, dtype=float)
        if self.is_tridiagonal:
            out = u * (1.0 - self._up - self._down)
            out[:-1] += self._up[:-1] * u[1:]
            out[1:] += self._down[1:] * u[:-1]
            return out
        return self._matrix @ u

    def __repr__(self):
        kind = "tridiagonal" if self.is_tridiagonal else "dense"
        return f"MarkovChain(n={self.n}, {kind})"

    # serialization -------------------------------------------------------

    def to_dict(self):
        if self.is_tridiagonal:
            return {"n": self.n, "format": "tridiagonal",
                    "up": self._up.tolist(), "down": self._down.tolist()}
        rows = []
        for x in range(self.n):
            cols, probs = self.row(x)
            rows.append([[int(c), float(p)] for c, p in zip(cols, probs)])
        return {"n": self.n, "format": "dense", "rows": rows}

    @classmethod
    def from_dict(cls, d):
        try:
            n = int(d["n"])
            fmt = d.get("format", "tridiagonal" if "up" in d else "dense")
            if fmt == "tridiagonal":
                chain = cls.birth_death(d["up"], d["down"])
            elif fmt == "dense":
                if len(d["rows"]) != n:
                    raise ConfigError(f"declared n={n} but {len(d['rows'])} rows given")
                P = np.zeros((n, n))
                for x, entries in enumerate(d["rows"]):
                    for col, prob in entries:
                        P[x, int(col)] += float(prob)
                chain = cls.from_dense(P)
            else:
                raise ConfigError(f"unknown chain format {fmt!r}")
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ConfigError(f"malformed chain description: {exc}") from exc
        if chain.n != n:
            raise ConfigError(f"declared n={n} but data has {chain.n} states")
        return chain

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class ReferencePair:
    """Distinguished state ``x0`` and a nonempty target set ``G`` avoiding it."""

    x0: int
    G: frozenset = field()

    def __post_init__(self):
        object.__setattr__(self, "G", frozenset(int(g) for g in self.G))
        if not self.G:
            raise ConfigError("target set must be nonempty")
        if self.x0 in self.G:
            raise ConfigError("x0 must not belong to the target set")

    def check(self, chain):
        states = {self.x0, *self.G}
        if min(states) < 0 or max(states) >= chain.n:
            raise ConfigError("reference pair refers to states outside the chain")
        return self

    @property
    def anchor(self):
        """The set ``{x0} | G`` to which recurrence is measured."""
        return self.G | {self.x0}


@dataclass
class ValidationReport:
    """Outcome of :func:`validate`; ``bad_rows`` maps check name to offending rows."""

    checks: dict
    bad_rows: dict

    @property
    def passed(self):
        return all(self.checks.values())

    def to_dict(self):
        return {"passed": self.passed, "checks": dict(self.checks),
                "bad_rows": {k: list(map(int, v)) for k, v in self.bad_rows.items()}}


def is_irreducible(chain):
    if chain.n == 1:
        return True
    k, _ = connected_components(chain.support(), directed=True, connection="strong")
    return k == 1


def validate(chain, tol=DEFAULT):
    """Check row sums, entry range and strong connectivity of ``chain``."""
    if chain.is_tridiagonal:
        stay = 1.0 - chain.up - chain.down
        entries = np.stack([chain.up, chain.down, stay])
        bad_range = np.flatnonzero(np.any((entries < -tol.structural) | (entries > 1), axis=0))
        sums = chain.up + chain.down + stay
    else:
        P = chain.dense()
        bad_range = np.flatnonzero(np.any((P < 0) | (P > 1), axis=1))
        sums = P.sum(axis=1)
    bad_sum = np.flatnonzero(np.abs(sums - 1.0) > tol.structural)
    irreducible = is_irreducible(chain)
    return ValidationReport(
        checks={"row_sums": bad_sum.size == 0, "entry_range": bad_range.size == 0,
                "strongly_connected": irreducible},
        bad_rows={"row_sums": bad_sum.tolist(), "entry_range": bad_range.tolist()},
    )


def _birth_death_measure(up, down):
    # detailed balance w[x+1] / w[x] = up[x] / down[x+1], accumulated in logs
    with np.errstate(divide="ignore"):
        logw = np.concatenate([[0.0], np.cumsum(np.log(up[:-1]) - np.log(down[1:]))])
    logw -= logw.max()
    w = np.exp(logw)
    return w / w.sum()


def stationary_distribution(chain, tol=DEFAULT):
    """Invariant probability vector of an irreducible chain.

    Birth-death chains use the detailed-balance product formula.  Dense
    chains solve ``(P^T - I) pi = 0`` with one row replaced by normalization.

    Raises
    ------
    NotIrreducible
        If the support graph is not strongly connected.
    SolverFailure
        If the fixed-point residual exceeds ``tol.solver_residual``.
    """
    if not is_irreducible(chain):
        raise NotIrreducible("stationary distribution requires an irreducible chain")
    if chain.is_tridiagonal:
        pi = _birth_death_measure(chain.up, chain.down)
    else:
        P = chain.dense()
        n = chain.n
        A = P.T - np.eye(n)
        np.fill_diagonal(A, -chain.escape())
        A[-1, :] = 1.0
        b = np.zeros(n)
        b[-1] = 1.0
        try:
            pi = np.linalg.solve(A, b)
        except np.linalg.LinAlgError as exc:
            raise SolverFailure(str(exc)) from exc
        pi = np.clip(pi, 0.0, None)
        pi /= pi.sum()
    resid = np.max(np.abs(chain.step_distribution(pi) - pi))
    if not np.isfinite(resid) or resid > tol.solver_residual:
        raise SolverFailure(f"stationary residual {resid:.3e}")
    return pi


def detailed_balance_violation(chain, pi):
    """Largest ``|pi(x)P(x,y) - pi(y)P(y,x)|`` over pairs of states."""
    if chain.is_tridiagonal:
        flow_up = pi[:-1] * chain.up[:-1]
        flow_down = pi[1:] * chain.down[1:]
        return float(np.max(np.abs(flow_up - flow_down), initial=0.0))
    F = pi[:, None] * chain.dense()
    return float(np.max(np.abs(F - F.T)))


def check_reversibility(chain, pi, tol=DEFAULT):
    """Return ``(reversible, max_violation)`` with respect to ``pi``."""
    v = detailed_balance_violation(chain, np.asarray(pi, dtype=float))
    return v <= tol.structural, v
