"""Oriented digital boiling in a random environment.

Modules: ``env`` (environment laws), ``growth`` (simulation and longest
increasing paths), ``exact`` (finite-size law of H), ``shape`` (annealed
constants), ``quenched`` (saddle constants of a frozen environment), ``tw``
(Tracy-Widom F2), ``lab`` (Monte Carlo experiments) and ``cli``.
"""
from .env import (Discrete, Empirical, Environment, PointMass, PolyEdge, Uniform,
                  critical_alphas, parse_dist, sample_environment)
from .errors import FeasibilityError, PrecisionError, RegimeError

__all__ = [
    "Discrete", "Empirical", "Environment", "PointMass", "PolyEdge", "Uniform",
    "critical_alphas", "parse_dist", "sample_environment",
    "FeasibilityError", "PrecisionError", "RegimeError",
]
__version__ = "0.1.0"
