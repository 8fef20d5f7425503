"""Finite-volume drift-diffusion simulator for vacancy-mediated memristors."""

from ._accel import BACKEND
from .physics import (
    DomainError,
    StatisticsKind,
    ValidationError,
    bernoulli,
    bernoulli_prime,
    entropy_phi,
    nondimensionalize,
    relative_entropy,
    stats_eval,
    stats_inverse,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DomainError",
    "StatisticsKind",
    "ValidationError",
    "bernoulli",
    "bernoulli_prime",
    "entropy_phi",
    "nondimensionalize",
    "relative_entropy",
    "stats_eval",
    "stats_inverse",
    "__version__",
]
