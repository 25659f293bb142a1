"""
Oracle core: ground sets and subsets, instrumented evaluation oracle,
instance kinds, generators and brute-force references.
"""

from .brute_force import (
    brute_force_min,
    brute_force_sparse_min,
    minimal_minimizer,
    sparse_minimizers,
    value_table,
)
from .generators import generate_instance
from .instance_io import dumps_instance, instance_from_dict, instance_to_dict, load_instance, save_instance
from .instances import (
    ContractedInstance,
    CoverageInstance,
    CutInstance,
    ExplicitInstance,
    ModularPlusConcaveInstance,
    SubmodularInstance,
)
from .ledger import QueryLedger
from .oracle import (
    MarginalSummary,
    contract,
    evaluate,
    evaluate_batch,
    evaluate_masks,
    marginal_summary,
    marginal_vector,
    validate_submodular,
)
from .rng import RngStream
from .subsets import GroundSet, Subset, to_indicator

__all__ = [
    'brute_force_min',
    'brute_force_sparse_min',
    'minimal_minimizer',
    'sparse_minimizers',
    'value_table',
    'generate_instance',
    'dumps_instance',
    'instance_from_dict',
    'instance_to_dict',
    'load_instance',
    'save_instance',
    'ContractedInstance',
    'CoverageInstance',
    'CutInstance',
    'ExplicitInstance',
    'ModularPlusConcaveInstance',
    'SubmodularInstance',
    'QueryLedger',
    'MarginalSummary',
    'contract',
    'evaluate',
    'evaluate_batch',
    'evaluate_masks',
    'marginal_summary',
    'marginal_vector',
    'validate_submodular',
    'RngStream',
    'GroundSet',
    'Subset',
    'to_indicator',
]
