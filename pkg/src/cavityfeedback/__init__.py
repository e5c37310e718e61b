"""Photodetection-mediated feedback for lossy optical cavities.

Submodules: ``fock`` (truncated Fock algebra and the one-photon feedback
map), ``liouville`` (feedback master equation and closed forms), ``mcwf``
(quantum-jump unraveling), ``qubit`` (polarization-coded qubit protection),
``stirap`` (adiabatic-passage model of the feedback atom) and ``cli``.
"""

from . import fock, liouville, mcwf, qubit, stirap
from .errors import (ConfigError, FeedbackError, NormDriftError, NumericalError, StepSizeError,
                     TraceDriftError, TruncationError)
from .liouville import DiffusionKind, FeedbackParams, IntegratorConfig

__version__ = "0.1.0"
