"""Linear algebra on a chain killed when it enters a taboo set.

:class:`Killed` holds the substochastic restriction ``Q`` of the transition
matrix to the free states (the complement of the taboo set) and offers
solves with ``I - Q``, matrix-vector products, and powers of ``Q`` through a
lazily grown ladder ``Q, Q^2, Q^4, ...``.
"""

import warnings

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve, solve_banded

from .config import DEFAULT
from .errors import SolverFailure

# per-step interpreter overhead expressed in flops, used to pick between
# plain stepping and the power ladder
_STEP_OVERHEAD = 4000.0


class Killed:
    """Substochastic restriction of ``chain`` to the complement of ``taboo``.

    Vectors handled by the methods live on the free states only, in
    increasing state order (see :attr:`free`).
    """

    def __init__(self, chain, taboo, tol=DEFAULT):
        self.chain = chain
        self.tol = tol
        mask = np.zeros(chain.n, dtype=bool)
        mask[np.fromiter(taboo, dtype=int)] = True
        self.taboo_mask = mask
        self.free = np.flatnonzero(~mask)
        self.m = self.free.size
        self.index = np.full(chain.n, -1)
        self.index[self.free] = np.arange(self.m)
        self.banded = chain.is_tridiagonal
        esc = chain.escape()
        self.outflow = esc[self.free]
        if self.banded:
            up, down = chain.up, chain.down
            nxt = np.append(self.free[1:], -1)
            prv = np.insert(self.free[:-1], 0, -1)
            self._up = np.where(nxt == self.free + 1, up[self.free], 0.0)
            self._down = np.where(prv == self.free - 1, down[self.free], 0.0)
            self._stay = 1.0 - up[self.free] - down[self.free]
        self._Q = None
        self._lu = None
        self._ladder = []

    # basic products --------------------------------------------------

    def dense(self):
        """``Q`` as a dense ``m x m`` array (cached)."""
        if self._Q is None:
            if self.m > self.tol.dense_limit:
                raise SolverFailure(f"{self.m} free states exceed the dense limit")
            if self.banded:
                Q = np.diag(self._stay)
                i = np.arange(self.m - 1)
                Q[i, i + 1] = self._up[:-1]
                Q[i + 1, i] = self._down[1:]
            else:
                Q = self.chain.dense()[np.ix_(self.free, self.free)]
            Q.flags.writeable = False
            self._Q = Q
        return self._Q

    def matvec(self, u):
        """``Q @ u``; ``u`` may be a vector or an ``(m, k)`` block."""
        if self.banded:
            u = np.asarray(u, dtype=float)
            shape = (-1,) + (1,) * (u.ndim - 1)
            out = self._stay.reshape(shape) * u
            out[:-1] += self._up[:-1].reshape(shape) * u[1:]
            out[1:] += self._down[1:].reshape(shape) * u[:-1]
            return out
        return self.dense() @ u

    def rmatvec(self, v):
        """``v @ Q`` for a row vector ``v``."""
        if self.banded:
            out = v * self._stay
            out[1:] += v[:-1] * self._up[:-1]
            out[:-1] += v[1:] * self._down[1:]
            return out
        return v @ self.dense()

    # solves with I - Q -------------------------------------------------

    def _banded_system(self):
        ab = np.zeros((3, self.m))
        ab[0, 1:] = -self._up[:-1]
        ab[1] = self.outflow
        ab[2, :-1] = -self._down[1:]
        return ab

    def _apply_IminusQ(self, x, transpose=False):
        if self.banded:
            # coefficients broadcast along the first axis so x may be a matrix
            col = (slice(None),) + (None,) * (x.ndim - 1)
            up, down = self._up[col], self._down[col]
            out = self.outflow[col] * x
            if transpose:
                out[1:] -= up[:-1] * x[:-1]
                out[:-1] -= down[1:] * x[1:]
            else:
                out[:-1] -= up[:-1] * x[1:]
                out[1:] -= down[1:] * x[:-1]
            return out
        Q = self.dense()
        col = (slice(None),) + (None,) * (x.ndim - 1)
        off = (Q.T if transpose else Q) @ x - np.diag(Q)[col] * x
        return self.outflow[col] * x - off

    def _norm(self):
        # infinity norm of I - Q: row outflow plus off-diagonal mass kept inside
        if self.banded:
            return float(np.max(self.outflow + self._up + self._down, initial=0.0))
        Q = self.dense()
        return float(np.max(self.outflow + Q.sum(axis=1) - np.diag(Q), initial=0.0))

    def solve(self, rhs, transpose=False):
        """Solve ``(I - Q) x = rhs`` (or the transposed system).

        The diagonal of ``I - Q`` is the total outflow of each free state,
        summed from off-diagonal probabilities, so nearly absorbing states do
        not lose precision to the cancellation ``1 - P(x, x)``.

        Raises
        ------
        SolverFailure
            On a singular system or a backward error above tolerance.
        """
        rhs = np.asarray(rhs, dtype=float)
        if self.m == 0:
            return np.zeros(0)
        with np.errstate(all="ignore"):
            try:
                if self.banded:
                    ab = self._banded_system()
                    if transpose:
                        ab = np.stack([np.append(0.0, ab[2, :-1]), ab[1], np.append(ab[0, 1:], 0.0)])
                    x = solve_banded((1, 1), ab, rhs, check_finite=False)
                else:
                    if self._lu is None:
                        A = -self.dense().copy()
                        np.fill_diagonal(A, self.outflow)
                        with warnings.catch_warnings():
                            # singularity is reported below from the solution
                            warnings.simplefilter("ignore", LinAlgWarning)
                            self._lu = lu_factor(A, check_finite=False)
                    x = lu_solve(self._lu, rhs, trans=1 if transpose else 0, check_finite=False)
            except (np.linalg.LinAlgError, ValueError) as exc:
                raise SolverFailure(str(exc)) from exc
            if not np.all(np.isfinite(x)):
                raise SolverFailure("singular system: some free state cannot reach the taboo set")
            resid = np.max(np.abs(self._apply_IminusQ(x, transpose) - rhs))
            scale = self._norm() * np.max(np.abs(x)) + np.max(np.abs(rhs))
        if resid > self.tol.solver_residual * scale:
            raise SolverFailure(f"backward error {resid / scale:.2e} exceeds tolerance")
        return x

    # powers ------------------------------------------------------------

    def ladder(self, level):
        """Return ``Q^(2^level)``, growing the cached ladder as needed."""
        if not self._ladder:
            self._ladder.append(self.dense())
        while len(self._ladder) <= level:
            top = self._ladder[-1]
            self._ladder.append(top @ top)
        return self._ladder[level]

    def _prefer_ladder(self, k):
        if self.m > self.tol.dense_limit:
            return False
        step_cost = k * ((3 * self.m if self.banded else self.m**2) + _STEP_OVERHEAD)
        levels = int(k).bit_length()
        missing = max(levels - len(self._ladder), 0)
        ladder_cost = missing * 2.0 * self.m**3 + levels * (self.m**2 + _STEP_OVERHEAD)
        return ladder_cost < step_cost

    def advance(self, u, k):
        """``Q^k @ u`` for integer ``k >= 0``."""
        k = int(k)
        if k <= 0:
            return np.array(u, dtype=float)
        if self._prefer_ladder(k):
            for level in range(k.bit_length()):
                if (k >> level) & 1:
                    u = self.ladder(level) @ u
            return u
        for _ in range(k):
            u = self.matvec(u)
        return u

    def tails(self, times):
        """Survival probabilities from every free state at the given times.

        Returns an array of shape ``(len(times), m)`` whose row ``j`` is
        ``Q^times[j] @ 1``, i.e. the probability of avoiding the taboo set
        for ``times[j]`` steps.
        """
        times = np.asarray(times, dtype=np.int64).ravel()
        out = np.empty((times.size, self.m))
        u = np.ones(self.m)
        current = 0
        for j in np.argsort(times, kind="stable"):
            t = max(int(times[j]), 0)
            u = self.advance(u, t - current)
            current = t
            out[j] = u
        return out

    def start_curve(self, i, threshold, cap):
        """Survival sequence ``s_0, s_1, ...`` from free state index ``i``.

        Stops at the first ``t`` with ``s_t < threshold`` or at ``t = cap``.
        Returns ``(values, hit_cap)``.
        """
        use_blocks = self.m <= self.tol.dense_limit and cap > 64
        if not use_blocks:
            return self._curve_by_steps(i, threshold, cap)
        block = 4096 if self.m <= 256 else 1024
        level = block.bit_length() - 1
        # W[:, j] = Q^j 1 gives s_{kB+j} = v_{kB} . W[:, j]
        W = np.empty((self.m, block))
        col = np.ones(self.m)
        for j in range(block):
            W[:, j] = col
            col = self.matvec(col)
        jump = self.ladder(level) if self._prefer_ladder(block) else None
        v = np.zeros(self.m)
        v[i] = 1.0
        chunks = []
        produced = 0
        while True:
            vals = v @ W
            below = np.flatnonzero(vals < threshold)
            room = cap + 1 - produced
            if below.size and below[0] < room:
                chunks.append(vals[: below[0] + 1])
                return np.concatenate(chunks), False
            if room <= block:
                chunks.append(vals[:room])
                return np.concatenate(chunks), True
            chunks.append(vals)
            produced += block
            if jump is not None:
                v = v @ jump
            else:
                for _ in range(block):
                    v = self.rmatvec(v)

    def _curve_by_steps(self, i, threshold, cap):
        v = np.zeros(self.m)
        v[i] = 1.0
        vals = [1.0]
        for _ in range(int(cap)):
            if vals[-1] < threshold:
                return np.array(vals), False
            v = self.rmatvec(v)
            vals.append(v.sum())
        return np.array(vals), vals[-1] >= threshold

    def first_time_at_most(self, i, level, upper):
        """Smallest ``k >= 1`` with ``P(tau > k) <= level`` from free index ``i``.

        ``upper`` must be a time at which the survival is known to be at most
        ``level``.  Binary lifting on the power ladder.
        """
        if self.m > self.tol.dense_limit:
            vals, _ = self._curve_by_steps(i, level * (1 - 1e-15), upper)
            idx = np.flatnonzero(vals[1:] <= level)
            return int(idx[0]) + 1 if idx.size else int(upper)
        v = np.zeros(self.m)
        v[i] = 1.0
        k = 0
        for lev in range(int(upper).bit_length(), -1, -1):
            w = v @ self.ladder(lev)
            if w.sum() > level:
                v = w
                k += 1 << lev
        return k + 1

    # Green function ------------------------------------------------------

    def inverse(self):
        """Dense ``(I - Q)^{-1}``."""
        return self.solve(np.eye(self.m))

    def green_diagonal(self):
        """Expected visits to each free state before absorption, started there.

        Birth-death chains use a cancellation-free recursion for the escape
        probability from each state to the taboo set; dense chains read the
        diagonal of the inverse.
        """
        if not self.banded:
            return np.diag(self.inverse()).copy()
        up, down = self.chain.up, self.chain.down
        n = self.chain.n
        free = self.free
        # right[k]: up[x] * P_{x+1}(reach taboo before x), for x = free[k]
        right = np.zeros(self.m)
        left = np.zeros(self.m)
        for k in range(self.m - 1, -1, -1):
            x = free[k]
            if x + 1 >= n:
                right[k] = 0.0
            elif self.taboo_mask[x + 1]:
                right[k] = up[x]
            else:
                nxt, d = right[k + 1], down[x + 1]
                right[k] = up[x] * nxt / (nxt + d) if nxt + d > 0 else 0.0
        for k in range(self.m):
            x = free[k]
            if x == 0:
                left[k] = 0.0
            elif self.taboo_mask[x - 1]:
                left[k] = down[x]
            else:
                prv, u = left[k - 1], up[x - 1]
                left[k] = down[x] * prv / (prv + u) if prv + u > 0 else 0.0
        with np.errstate(divide="ignore"):
            return 1.0 / (left + right)
