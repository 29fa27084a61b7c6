"""Beta-coalescent block-counting chain: rates, simulation, exact recursions,
renewal approximation, stable limits, probability metrics and asymptotic
moment expansions."""

from .errors import BetaCoalError, RegimeError, ResourceCapError
from .rates import (
    CoalescentParams,
    DecrementLaw,
    LimitStepLaw,
    collision_rate,
    decrement_deviation,
    decrement_law,
    digamma,
    limit_step_pmf,
    log_gamma,
    total_rate,
)

__all__ = [
    "BetaCoalError",
    "RegimeError",
    "ResourceCapError",
    "CoalescentParams",
    "DecrementLaw",
    "LimitStepLaw",
    "collision_rate",
    "decrement_deviation",
    "decrement_law",
    "digamma",
    "limit_step_pmf",
    "log_gamma",
    "total_rate",
]

__version__ = "0.1.0"
