"""Exception hierarchy shared by the simulation modules."""


class FeedbackError(Exception):
    """Base class for all package errors."""


class ConfigError(FeedbackError, ValueError):
    """Invalid run configuration or invalid physical parameters."""


class NumericalError(FeedbackError, RuntimeError):
    """A numerical guard tripped during a simulation."""


class TruncationError(NumericalError):
    """Population would leak past the top retained Fock level."""


class TraceDriftError(NumericalError):
    pass


class NormDriftError(NumericalError):
    pass


class StepSizeError(NumericalError):
    """Jump probability per step too large for the first-order scheme."""
