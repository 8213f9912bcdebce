"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Inconsistent or invalid model configuration (sizes, units, schema)."""


class NoMarketError(ValueError):
    """An operation required liquid quotes but the market is empty."""


class InterpolationRangeError(ValueError):
    """Requested maturity lies outside the quoted maturity range."""


class NoBracketingQuoteError(ValueError):
    """The single-instrument hedge needs a liquid quote on the far side of
    the target maturity and none exists."""


class RecoveryLawError(TypeError):
    """A density routine was called with the wrong kind of recovery law."""


class UndefinedReturnError(ValueError):
    """Rate of return is undefined because the capital at risk is zero."""


class ConvergenceError(RuntimeError):
    """Constraint refinement did not reach tolerance within the allowed rounds."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class StudyAbortedError(RuntimeError):
    """A trial inside a simulation study failed; carries replay information."""

    def __init__(self, message: str, trial_index: int, master_seed: int):
        super().__init__(message)
        self.trial_index = trial_index
        self.master_seed = master_seed
