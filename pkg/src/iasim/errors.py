"""Exception types shared by all simulator modules.

The CLI maps these onto process exit codes: ConfigError -> 2,
NumericalFailureError (and subclasses) -> 3, SyncTimeoutError -> 4.
"""


class SimulationError(Exception):
    """Base class for all simulator-specific failures."""


class ConfigError(SimulationError):
    """Invalid or unknown configuration content."""


class NumericalFailureError(SimulationError):
    """A numerical routine failed to produce a usable result."""

    def __init__(self, message: str, sweeps: int | None = None):
        super().__init__(message)
        self.sweeps = sweeps


class SingularMatrixError(NumericalFailureError):
    """Matrix inversion hit a pivot below the relative floor."""


class UnsupportedOrderError(SimulationError):
    """Requested Hadamard order is not a power of two."""


class UndefinedCorrelationError(SimulationError):
    """Correlation requested against a zero-norm response."""


class InvalidPilotError(SimulationError):
    """A pilot entry with zero magnitude cannot be divided out."""


class InfeasibleSubsetError(SimulationError):
    """Selected precoder rows are too ill-conditioned to zero-force."""


class ProtocolViolationError(SimulationError):
    """An event arrived in a phase that does not accept it."""


class MissingFeedbackError(SimulationError):
    """Feedback collection attempted before all users reported."""

    def __init__(self, missing_users):
        self.missing_users = sorted(missing_users)
        super().__init__(f"missing feedback from users {self.missing_users}")


class SyncTimeoutError(SimulationError):
    """Over-air synchronization exceeded the slot cap."""
