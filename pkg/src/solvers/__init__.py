"""
Solvers for k-sparse submodular minimization: the deterministic parallel
pipeline, the randomized sequential pipeline and the driver that runs either.
"""

from .meta import SolveConfig, SolveMode, SolveReport, solve
from .parallel_solver import arc_finding_parallel, dim_reduction_parallel, dual_certificate_truncated, truncate
from .sequential_solver import (arc_finding_sequential, certificate_sample_estimate, dim_reduction_sequential,
                                negative_mass_estimate, stoch_dual_certificate, submodular_ftrl, v_sampling)

__all__ = [
    'SolveConfig',
    'SolveMode',
    'SolveReport',
    'arc_finding_parallel',
    'arc_finding_sequential',
    'certificate_sample_estimate',
    'dim_reduction_parallel',
    'dim_reduction_sequential',
    'dual_certificate_truncated',
    'negative_mass_estimate',
    'solve',
    'stoch_dual_certificate',
    'submodular_ftrl',
    'truncate',
    'v_sampling',
]
