"""
Entropy geometry on the capped simplex and the online learners built on it.
"""

from .entropy import (
    CappedSimplexPoint,
    bregman,
    entropy,
    ftrl_update,
    implied_permutation,
    kkt_residual,
    proximal_step,
    strong_convexity,
)
from .online import IterateTrace, WeightTrace, mirror_descent, multiplicative_weights, stochastic_ftrl

__all__ = [
    'CappedSimplexPoint',
    'bregman',
    'entropy',
    'ftrl_update',
    'implied_permutation',
    'kkt_residual',
    'proximal_step',
    'strong_convexity',
    'IterateTrace',
    'WeightTrace',
    'mirror_descent',
    'multiplicative_weights',
    'stochastic_ftrl',
]
