"""
Exhaustive reference solvers.
All routines read values without charging a ledger.
"""

from fractions import Fraction
from typing import Tuple

import numpy as np

from utils.errors import SizeLimitError
from utils.settings import TOLERANCE
from .instances import ExplicitInstance, SubmodularInstance, all_values
from .subsets import Subset, sparse_rows

BRUTE_FORCE_LIMIT = 24


def value_table(inst: SubmodularInstance) -> np.ndarray:
    """All 2^n normalised values in mask order."""
    if inst.n > BRUTE_FORCE_LIMIT:
        raise SizeLimitError(f"Full enumeration is limited to n <= {BRUTE_FORCE_LIMIT}, got n={inst.n}")
    return all_values(inst)


def _optimal_codes(inst: SubmodularInstance) -> Tuple[np.ndarray, float]:
    table = value_table(inst)
    if isinstance(inst, ExplicitInstance):
        # exact comparison on the raw table entries
        exact = [Fraction(float(v)) for v in inst.table]
        best = min(exact)
        codes = np.array([code for code, v in enumerate(exact) if v == best], dtype=np.int64)
        return codes, float(best - Fraction(inst.offset))
    best = float(table.min())
    codes = np.flatnonzero(table <= best + TOLERANCE).astype(np.int64)
    return codes, best


def minimal_minimizer(inst: SubmodularInstance) -> Subset:
    """Intersection of all minimizers, itself a minimizer by submodularity."""
    codes, _ = _optimal_codes(inst)
    return Subset.from_mask(inst.n, int(np.bitwise_and.reduce(codes)))


def brute_force_min(inst: SubmodularInstance) -> Tuple[Subset, float]:
    """Minimal minimizer and the optimal value f*."""
    codes, best = _optimal_codes(inst)
    return Subset.from_mask(inst.n, int(np.bitwise_and.reduce(codes))), best


def brute_force_sparse_min(inst: SubmodularInstance, k: int) -> Tuple[Subset, float]:
    """Best set of size at most k; ties go to the first set in size-then-lexicographic order."""
    best_value = np.inf
    best_row = None
    for rows in sparse_rows(inst.n, k):
        values = inst.values(rows)
        idx = int(np.argmin(values))
        if values[idx] < best_value - TOLERANCE:
            best_value = float(values[idx])
            best_row = rows[idx]
    return Subset.from_indicator(best_row), best_value


def sparse_minimizers(inst: SubmodularInstance, k: int) -> list:
    """Every set of size at most k attaining the k-sparse optimum (within tolerance)."""
    _, best = brute_force_sparse_min(inst, k)
    found = []
    for rows in sparse_rows(inst.n, k):
        values = inst.values(rows)
        for row in rows[values <= best + TOLERANCE]:
            found.append(Subset.from_indicator(row))
    return found
