"""Exception hierarchy for the sampler library."""


class FptsimError(Exception):
    """Base class for all library errors."""


class ModelError(FptsimError):
    """A drift model violated its contract (non-finite value, bad sigma, broken bound)."""


class NumericError(FptsimError):
    """A numerical routine failed to converge or overflowed."""


class ConfigError(FptsimError, ValueError):
    """Invalid sampler configuration or flag combination."""


class BudgetError(FptsimError):
    """Iteration budget exhausted before acceptance.

    Carries the partial run statistics accumulated so far in ``stats``.
    """

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats
