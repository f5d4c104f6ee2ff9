"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument violates a documented precondition."""


class SamplingError(RuntimeError):
    """Collocation sampling could not satisfy its constraints."""


class InconsistentProblemError(ValueError):
    """Problem data disagree with each other (e.g. exact solution vs. boundary data)."""


class NumericalFailure(FloatingPointError):
    """A computation produced non-finite values."""


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending key."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")
