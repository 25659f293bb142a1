"""
Lovász extension, permutation subgradients, move-to-front and dual certificates.
"""

from .certificates import (
    CertificateBundle,
    CertificateCheck,
    certificate_vector,
    in_base_polytope,
    verify_dual_certificate,
)
from .extension import (
    Permutation,
    Subgradient,
    as_order,
    delta_move,
    lovasz_eval,
    move_to_front,
    neg_sum,
    partial_subgradient,
    permutation_of,
    prefix_rows,
    subgradient,
    subgradients,
)

__all__ = [
    'CertificateBundle',
    'CertificateCheck',
    'certificate_vector',
    'in_base_polytope',
    'verify_dual_certificate',
    'Permutation',
    'Subgradient',
    'as_order',
    'delta_move',
    'lovasz_eval',
    'move_to_front',
    'neg_sum',
    'partial_subgradient',
    'permutation_of',
    'prefix_rows',
    'subgradient',
    'subgradients',
]
