"""
Command-line interface for the sparse SFM toolkit.
"""

from .bench import BenchPlan, run_plan
from .commands import build_parser, main

__all__ = ['BenchPlan', 'build_parser', 'main', 'run_plan']
