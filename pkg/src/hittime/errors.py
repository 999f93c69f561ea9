"""Exception and warning classes."""


class HittimeError(Exception):
    """Base class for all package errors."""


class NotIrreducible(HittimeError):
    pass


class SolverFailure(HittimeError):
    pass


class TargetUnreachable(HittimeError):
    pass


class CurveTooShort(HittimeError):
    pass


class InsufficientGrid(HittimeError):
    pass


class SmallnessViolated(HittimeError):
    """Raised when envelope constants are requested outside their domain.

    ``violations`` lists the failed conditions as readable strings.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class NotReversible(HittimeError):
    pass


class NotBirthDeath(HittimeError):
    pass


class ParamOutOfRange(HittimeError, ValueError):
    pass


class ConfigError(HittimeError):
    pass


class HorizonExceeded(UserWarning):
    """A survival curve hit its step cap before the truncation level."""


class EmptySupremum(UserWarning):
    """A supremum over interior states was taken over the empty set."""


class TrajectoryCap(UserWarning):
    """Some simulated trajectories were stopped at the step cap."""
