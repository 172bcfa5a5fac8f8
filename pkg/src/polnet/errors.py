"""Exception types shared across the solver."""


class ModelError(ValueError):
    """A model constraint or numerical contract was violated."""


class ConfigError(ModelError):
    """A scenario configuration failed validation."""


class InsufficientHorizonError(ModelError):
    """The requested integration horizon cannot reach the requested tolerance.

    Carries the tail bound that the horizon *can* achieve.
    """

    def __init__(self, message: str, achievable_bound: float):
        super().__init__(message)
        self.achievable_bound = achievable_bound


class IllConditionedError(ModelError):
    """A linear system is too ill-conditioned to solve reliably."""


class ComparisonNotApplicableError(ModelError):
    """The two-source vs brown-only emission comparison needs the inner regime."""
