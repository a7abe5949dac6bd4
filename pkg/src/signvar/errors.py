"""Exception hierarchy shared across the package.

Each subclass maps to a distinct process exit code in the CLI, so library
errors stay classifiable without string matching.
"""

from __future__ import annotations


class SignvarError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SignvarError):
    """Invalid configuration: bad key, type, or value in a run config."""


class DataError(SignvarError):
    """Invalid input data: malformed CSV, non-finite values, shape mismatch."""


class InfeasibleError(SignvarError):
    """The restricted parameter set appears empty or has negligible mass."""


class BudgetExceededError(InfeasibleError):
    """Accept-reject proposal budget exhausted before enough acceptances."""

    def __init__(self, message: str, proposals: int, accepted: int):
        super().__init__(message)
        self.proposals = proposals
        self.accepted = accepted


class NumericalError(SignvarError):
    """Numerical failure: non-SPD matrix, degenerate draws, shrink-cap hit."""


class DegenerateLatentError(NumericalError):
    """A latent vector or matrix fell on a measure-zero degenerate set."""


class ShrinkBracketError(NumericalError):
    """Slice-sampling bracket shrink exceeded its iteration cap."""

    def __init__(self, message: str, step: str, trials: int):
        super().__init__(message)
        self.step = step
        self.trials = trials


class DegenerateDrawsError(NumericalError):
    """Draw matrix too degenerate for a covariance-based diagnostic."""
