"""Generalized extragradient-type solvers for inclusions ``0 in F(x) + T(x)``."""

from .operators import ConfigError, NumericalFailure, ProblemInstance, UsageError
from .schedules import GAEG, GAEG_PLUS, GEAG, GFEG, GFEG_PLUS, SCHEMES, make_schedule
from .directions import affine, current_gradient, past_gradient
from .schemes import run, init_state, step

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "NumericalFailure", "ProblemInstance", "UsageError",
    "GAEG", "GAEG_PLUS", "GEAG", "GFEG", "GFEG_PLUS", "SCHEMES", "make_schedule",
    "affine", "current_gradient", "past_gradient", "run", "init_state", "step",
]
