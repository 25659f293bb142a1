"""
Ring families over the ground set and the extension maintainer serving f^#R.
"""

from .handle import ExtensionHandle
from .maintainer import ExtensionMaintainer
from .state import RingFamilyState

__all__ = [
    'ExtensionHandle',
    'ExtensionMaintainer',
    'RingFamilyState',
]
