"""
Accounted access to the evaluation oracle.

evaluate / evaluate_batch charge the ledger (one batch = one round);
everything else in this module is built on them.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from utils.errors import ConfigError, SizeLimitError
from utils.settings import TOLERANCE
from .instances import ContractedInstance, SubmodularInstance, all_values, submodularity_gap
from .ledger import QueryLedger
from .subsets import SubsetLike, to_indicator, to_matrix

logger = logging.getLogger("sparse_sfm")

VALIDATE_LIMIT = 20


def evaluate(inst: SubmodularInstance, S: SubsetLike, ledger: Optional[QueryLedger] = None) -> float:
    """f(S) - f(empty); one query, one round."""
    row = to_indicator(S, inst.n)
    if ledger is not None:
        ledger.record(1)
    return float(inst.values(row[None, :])[0])


def evaluate_masks(inst: SubmodularInstance, masks: np.ndarray, ledger: Optional[QueryLedger] = None,
                   max_workers: int = 1) -> np.ndarray:
    """Values of a batch of indicator rows; charges len(masks) queries and one round."""
    masks = np.asarray(masks, dtype=bool)
    if masks.shape[0] == 0:
        return np.zeros(0)
    if ledger is not None:
        ledger.record(masks.shape[0])
    if max_workers <= 1 or masks.shape[0] < 2 * max_workers:
        return inst.values(masks)

    chunks = np.array_split(np.arange(masks.shape[0]), max_workers)
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        parts = list(executor.map(lambda rows: inst.values(masks[rows]), chunks))
    return np.concatenate(parts)


def evaluate_batch(inst: SubmodularInstance, sets: Sequence[SubsetLike],
                   ledger: Optional[QueryLedger] = None, max_workers: int = 1) -> List[float]:
    """Values in input order; an empty batch costs nothing."""
    if len(sets) == 0:
        return []
    return evaluate_masks(inst, to_matrix(sets, inst.n), ledger, max_workers).tolist()


def marginal_vector(inst: SubmodularInstance, ledger: Optional[QueryLedger] = None) -> np.ndarray:
    """u_f with (u_f)_p = f({p}), in one batch."""
    return evaluate_masks(inst, np.eye(inst.n, dtype=bool), ledger)


@dataclass
class MarginalSummary:
    """Singleton values together with f(V)"""
    u: np.ndarray
    full_value: float

    @property
    def l1(self) -> float:
        return float(np.abs(self.u).sum())

    @property
    def linf(self) -> float:
        return float(np.abs(self.u).max()) if self.u.size else 0.0

    @property
    def sampling_mass(self) -> float:
        """2 * ||u||_1 - f(V), the total of v = 2u - g for any subgradient g"""
        return 2.0 * float(self.u.sum()) - self.full_value


def marginal_summary(inst: SubmodularInstance, ledger: Optional[QueryLedger] = None) -> MarginalSummary:
    """u_f and f(V) in a single batch of n+1 queries."""
    masks = np.vstack([np.eye(inst.n, dtype=bool), np.ones((1, inst.n), dtype=bool)])
    values = evaluate_masks(inst, masks, ledger)
    return MarginalSummary(u=values[:-1], full_value=float(values[-1]))


def validate_submodular(inst: SubmodularInstance) -> bool:
    """Exhaustive diminishing-returns check within 1e-9 (n <= 20)."""
    if inst.n > VALIDATE_LIMIT:
        raise SizeLimitError(f"validate_submodular enumerates 2^n sets; n={inst.n} exceeds {VALIDATE_LIMIT}")
    gap = submodularity_gap(all_values(inst), inst.n)
    if gap < -TOLERANCE:
        logger.debug("Submodularity violated by %.3g on %r", -gap, inst)
        return False
    return True


def contract(inst: SubmodularInstance, P: SubsetLike, ledger: Optional[QueryLedger] = None) -> SubmodularInstance:
    """Instance over V minus P computing f_P(S) = f(S + P) - f(P).

    Contracting the empty set returns inst itself. f(P) costs one query.
    Instances have at least one element, so P = V is rejected before any query.
    """
    row = to_indicator(P, inst.n)
    if not row.any():
        return inst
    if row.all():
        raise ConfigError(f"Contracting all {inst.n} elements leaves an empty ground set")
    base_value = evaluate(inst, row, ledger)
    return ContractedInstance(inst, row, base_value)
