"""Open-system dynamics of a two-site Hubbard-Holstein molecule.

Exact reduced dynamics via hierarchical equations of motion, plus
decoherence diagnostics, multi-exponential timescale fits and clamped
single-mode reference models.
"""

__version__ = "1.0.0"

from .bath import BathExpansion, expand_bath
from .fitting import ExpFitResult, FitConfig, fit_exponentials
from .heom import HeomConfig, Trajectory, propagate, propagate_model
from .model import ModelParams

__all__ = [
    "BathExpansion",
    "ExpFitResult",
    "FitConfig",
    "HeomConfig",
    "ModelParams",
    "Trajectory",
    "__version__",
    "expand_bath",
    "fit_exponentials",
    "propagate",
    "propagate_model",
]
