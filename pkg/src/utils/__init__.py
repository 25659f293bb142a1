"""
Shared utilities: logging, settings and constant profiles, error types.
"""

from .errors import (
    ConfigError,
    DomainError,
    InconsistentStateError,
    InvariantError,
    MalformedSubsetError,
    SizeLimitError,
    SparseSFMError,
    StepSizeError,
)
from .logger import LOGGER_NAME, setup_logging
from .settings import TOLERANCE, ConstantProfile, get_profile

__all__ = [
    'ConfigError',
    'DomainError',
    'InconsistentStateError',
    'InvariantError',
    'MalformedSubsetError',
    'SizeLimitError',
    'SparseSFMError',
    'StepSizeError',
    'LOGGER_NAME',
    'setup_logging',
    'TOLERANCE',
    'ConstantProfile',
    'get_profile',
]
