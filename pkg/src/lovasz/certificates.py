"""
Dual certificates as weighted permutation bundles, and their exhaustive verifiers.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from oracle_core.brute_force import brute_force_min, value_table
from oracle_core.instances import SubmodularInstance
from oracle_core.ledger import QueryLedger
from oracle_core.subsets import mask_rows, sparse_rows
from utils.errors import ConfigError, SizeLimitError
from utils.settings import TOLERANCE
from .extension import PermutationLike, as_order, neg_sum, subgradients

VERIFY_LIMIT = 20


@dataclass
class CertificateBundle:
    """y = sum_t weights[t] * g_{permutations[t]}"""
    permutations: List[np.ndarray]
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        self.permutations = [as_order(pi) for pi in self.permutations]
        if not self.permutations:
            raise ConfigError("A certificate bundle needs at least one permutation")
        n = self.permutations[0].shape[0]
        if any(order.shape[0] != n for order in self.permutations):
            raise ConfigError("All permutations in a bundle must share the ground set")
        if self.weights is None:
            self.weights = np.full(len(self.permutations), 1.0 / len(self.permutations))
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (len(self.permutations),):
            raise ConfigError("Bundle needs one weight per permutation")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > 1e-12:
            raise ConfigError("Bundle weights must be nonnegative and sum to 1")

    @classmethod
    def uniform(cls, permutations: Sequence[PermutationLike]) -> "CertificateBundle":
        return cls(list(permutations))

    @classmethod
    def concat(cls, bundles: Sequence["CertificateBundle"]) -> "CertificateBundle":
        """Uniform bundle over every permutation of every input bundle."""
        return cls([order for bundle in bundles for order in bundle.permutations])

    @property
    def n(self) -> int:
        return self.permutations[0].shape[0]

    def __len__(self) -> int:
        return len(self.permutations)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "permutations": [order.tolist() for order in self.permutations],
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CertificateBundle":
        try:
            return cls([np.asarray(order) for order in data["permutations"]], data.get("weights"))
        except (KeyError, TypeError) as e:
            raise ConfigError(f"Malformed certificate bundle: {e}") from e


@dataclass
class CertificateCheck:
    """Outcome of verify_dual_certificate; worst_violation <= 0 means slack"""
    cond1: bool
    cond2: bool
    worst_violation: float
    f_star: float
    negative_sum: float

    @property
    def valid(self) -> bool:
        return self.cond1 and self.cond2

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cond1": self.cond1,
            "cond2": self.cond2,
            "valid": self.valid,
            "worst_violation": self.worst_violation,
            "f_star": self.f_star,
            "negative_sum": self.negative_sum,
        }


def certificate_vector(bundle: CertificateBundle, inst: SubmodularInstance,
                       ledger: Optional[QueryLedger] = None) -> np.ndarray:
    """Dense weighted average of the bundle's subgradients (m * n queries, one round)."""
    grads = subgradients(inst, bundle.permutations, ledger)
    return np.sum([w * sg.g for w, sg in zip(bundle.weights, grads)], axis=0)


def _check_size(inst: SubmodularInstance):
    if inst.n > VERIFY_LIMIT:
        raise SizeLimitError(f"Exhaustive verification is limited to n <= {VERIFY_LIMIT}, got n={inst.n}")


def verify_dual_certificate(inst: SubmodularInstance, y: np.ndarray, delta: float, k: int,
                            ell: Optional[int] = None, f_star: Optional[float] = None) -> CertificateCheck:
    """Check f* <= y_-^ell(V) + delta (ell defaults to k + 1) and y(S) <= f(S) for all |S| <= k."""
    _check_size(inst)
    y = np.asarray(y, dtype=float)
    ell = k + 1 if ell is None else ell
    if f_star is None:
        _, f_star = brute_force_min(inst)

    negative = neg_sum(y, ell)
    slack1 = f_star - negative - delta
    worst_excess = -np.inf
    for rows in sparse_rows(inst.n, k):
        excess = rows.astype(float) @ y - inst.values(rows)
        worst_excess = max(worst_excess, float(excess.max()))

    return CertificateCheck(
        cond1=bool(slack1 <= TOLERANCE),
        cond2=bool(worst_excess <= TOLERANCE),
        worst_violation=float(max(slack1, worst_excess)),
        f_star=float(f_star),
        negative_sum=negative,
    )


def in_base_polytope(inst: SubmodularInstance, y: np.ndarray) -> bool:
    """y(S) <= f(S) for every S and y(V) = f(V), within 1e-9."""
    _check_size(inst)
    y = np.asarray(y, dtype=float)
    table = value_table(inst)
    total = 1 << inst.n
    chunk = 1 << 16
    for start in range(0, total, chunk):
        stop = min(total, start + chunk)
        if np.any(mask_rows(inst.n, start, stop).astype(float) @ y > table[start:stop] + TOLERANCE):
            return False
    return abs(float(y.sum()) - float(table[-1])) <= TOLERANCE
