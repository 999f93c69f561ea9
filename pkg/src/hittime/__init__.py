"""Exact and Monte Carlo analysis of hitting times of finite Markov chains."""

from .chain import MarkovChain, ReferencePair, validate, stationary_distribution, check_reversibility
from .config import Tolerances, DEFAULT

__all__ = ["MarkovChain", "ReferencePair", "validate", "stationary_distribution",
           "check_reversibility", "Tolerances", "DEFAULT"]
__version__ = "0.1.0"
