"""
Exception hierarchy for the sparse SFM toolkit.
Each error also derives from the closest builtin so callers can catch either.
"""

from typing import Optional


class SparseSFMError(Exception):
    """Base class for all toolkit errors"""


class ConfigError(SparseSFMError, ValueError):
    """Invalid parameters, profiles or solve configuration"""


class MalformedSubsetError(SparseSFMError, ValueError):
    """A subset references elements outside the ground set"""


class DomainError(SparseSFMError, ValueError):
    """A point lies outside the domain of the requested operation"""


class SizeLimitError(SparseSFMError, ValueError):
    """Exhaustive routine called on a ground set that is too large"""


class StepSizeError(SparseSFMError, ArithmeticError):
    """Online-learning step size guard violated"""

    def __init__(self, message: str, iteration: Optional[int] = None):
        super().__init__(message)
        self.iteration = iteration


class InconsistentStateError(SparseSFMError, RuntimeError):
    """Requested update contradicts the ring family state"""


class InvariantError(SparseSFMError, RuntimeError):
    """Internal invariant broken; signals a soundness bug or non-submodular input"""
