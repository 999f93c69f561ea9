"""Numerical tolerances shared by every solver in the package."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Central record of numerical thresholds.

    Attributes
    ----------
    structural : float
        Row-sum and detailed-balance slack for chain validation.
    solver_residual : float
        Normwise backward-error bound accepted from a linear solve.
    consistency : float
        Relative agreement required between two independent routes to the
        same quantity (e.g. Green row sums against mean hitting times).
    truncation : float
        Survival level at which survival curves stop.
    hard_cap : int
        Maximum number of steps a survival curve may cover.
    dense_limit : int
        Largest free-state count for which dense matrices are formed.
    """

    structural: float = 1e-12
    solver_residual: float = 1e-10
    consistency: float = 1e-8
    truncation: float = 1e-12
    hard_cap: int = 10**8
    dense_limit: int = 2000


DEFAULT = Tolerances()
