"""Exception types shared across the package."""


class InvalidDiscretization(ValueError):
    """Grid step is not of the form 1/n for a positive integer n."""


class EmptyActionSpace(ValueError):
    """The discretized simplex contains no feasible meta arm (K * epsilon > 1)."""


class InfeasibleInstance(ValueError):
    """No hidden-optimum placement exists for the requested instance parameters."""


class InvalidHorizon(ValueError):
    """Horizon too short for the parameter schedule."""


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


class SlopeUndefined(ValueError):
    """Log-log slope requested on nonpositive regret values."""


class InternalInconsistency(RuntimeError):
    """An impossible combination of observations was encountered."""
