"""
Lovász extension, permutation subgradients and move-to-front.

A permutation is an index array; its prefix sets are the first i elements.
The subgradient g_pi takes prefix differences f(pi[i]) - f(pi[i-1]) along pi,
and all n prefix queries of one permutation go out as a single batch.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from oracle_core.instances import SubmodularInstance
from oracle_core.ledger import QueryLedger
from oracle_core.oracle import evaluate_masks
from oracle_core.subsets import SubsetLike, to_indicator
from utils.errors import DomainError, InvariantError
from utils.settings import TOLERANCE


@dataclass(frozen=True, eq=False)
class Permutation:
    """Bijection position -> element, stored as an index array"""
    order: np.ndarray

    def __post_init__(self):
        order = np.asarray(self.order, dtype=np.int64)
        if order.ndim != 1 or not np.array_equal(np.sort(order), np.arange(order.shape[0])):
            raise DomainError(f"Not a permutation of 0..{order.shape[0] - 1}: {order.tolist()}")
        object.__setattr__(self, "order", order)

    @property
    def n(self) -> int:
        return self.order.shape[0]

    def positions(self) -> np.ndarray:
        pos = np.empty(self.n, dtype=np.int64)
        pos[self.order] = np.arange(self.n)
        return pos

    def to_list(self) -> list:
        return self.order.tolist()

    def __eq__(self, other) -> bool:
        if isinstance(other, Permutation):
            return np.array_equal(self.order, other.order)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.order.tobytes())

    def __repr__(self) -> str:
        return f"Permutation({self.order.tolist()})"


PermutationLike = Union[Permutation, np.ndarray, Sequence[int]]


def as_order(pi: PermutationLike) -> np.ndarray:
    if isinstance(pi, Permutation):
        return pi.order
    return Permutation(np.asarray(pi)).order


@dataclass
class Subgradient:
    """g_pi together with the prefix values it was built from"""
    g: np.ndarray
    source: Permutation
    prefix_values: np.ndarray = field(repr=False)

    def best_prefix_value(self) -> float:
        return float(self.prefix_values.min())


def prefix_rows(order: np.ndarray) -> np.ndarray:
    """Rows i = 0..n-1 hold the prefix of length i + 1."""
    n = order.shape[0]
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)
    return pos[None, :] < np.arange(1, n + 1)[:, None]


def permutation_of(x: np.ndarray) -> Permutation:
    """Coordinates in nonincreasing order of x, ties by ascending index."""
    x = np.asarray(x, dtype=float)
    return Permutation(np.lexsort((np.arange(x.shape[0]), -x)))


def subgradients(inst: SubmodularInstance, perms: Sequence[PermutationLike],
                 ledger: Optional[QueryLedger] = None) -> List[Subgradient]:
    """Subgradients of several permutations from one batch of prefix queries."""
    orders = [as_order(pi) for pi in perms]
    if not orders:
        return []
    n = inst.n
    values = evaluate_masks(inst, np.vstack([prefix_rows(order) for order in orders]), ledger)

    result = []
    for t, order in enumerate(orders):
        prefix_values = np.concatenate([[0.0], values[t * n:(t + 1) * n]])
        g = np.empty(n)
        g[order] = np.diff(prefix_values)
        result.append(Subgradient(g=g, source=Permutation(order), prefix_values=prefix_values))
    return result


def subgradient(inst: SubmodularInstance, pi: PermutationLike, ledger: Optional[QueryLedger] = None) -> Subgradient:
    """g_pi from n prefix queries in one round."""
    return subgradients(inst, [pi], ledger)[0]


def partial_subgradient(inst: SubmodularInstance, pi: PermutationLike, i: int,
                        ledger: Optional[QueryLedger] = None, prefix_hint: Optional[float] = None) -> float:
    """(g_pi)_i from at most two queries; prefix_hint is f of the prefix before i."""
    order = as_order(pi)
    n = order.shape[0]
    pos = int(np.flatnonzero(order == i)[0])
    rows = prefix_rows(order)

    if pos == 0:
        return float(evaluate_masks(inst, rows[0:1], ledger)[0])
    if prefix_hint is not None:
        return float(evaluate_masks(inst, rows[pos:pos + 1], ledger)[0]) - float(prefix_hint)
    pair = evaluate_masks(inst, rows[pos - 1:pos + 1], ledger)
    return float(pair[1] - pair[0])


def lovasz_eval(inst: SubmodularInstance, x: np.ndarray, ledger: Optional[QueryLedger] = None) -> float:
    """Lovász extension value at x in [0, 1]^V."""
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.n,):
        raise DomainError(f"Point of shape {x.shape} for a ground set of size {inst.n}")
    if np.any(x < -1e-12) or np.any(x > 1 + 1e-12):
        raise DomainError("Lovász extension is defined on the unit cube")
    g = subgradient(inst, permutation_of(x), ledger).g
    return float(g @ x)


def move_to_front(pi: PermutationLike, P: SubsetLike) -> Permutation:
    """Elements of P first, then the rest, both in their original relative order."""
    order = as_order(pi)
    in_p = to_indicator(P, order.shape[0])[order]
    return Permutation(np.concatenate([order[in_p], order[~in_p]]))


def delta_move(inst: SubmodularInstance, pi: PermutationLike, P: SubsetLike,
               ledger: Optional[QueryLedger] = None) -> np.ndarray:
    """Decrease vector g_pi - g_{pi <- P} off P (zero on P), nonnegative by submodularity."""
    row = to_indicator(P, inst.n)
    if not row.any():
        return np.zeros(inst.n)
    original, moved = subgradients(inst, [pi, move_to_front(pi, row)], ledger)
    delta = original.g - moved.g
    delta[row] = 0.0

    scale = max(1.0, float(np.abs(original.prefix_values).max()), float(np.abs(moved.prefix_values).max()))
    if delta.min() < -TOLERANCE * scale:
        raise InvariantError(f"Move-to-front increased coordinate {int(delta.argmin())} by {-delta.min():.3g}; "
                             "the function is not submodular")
    return np.maximum(delta, 0.0)


def neg_sum(y: np.ndarray, ell: int, P: Optional[SubsetLike] = None) -> float:
    """Sum of the ell most negative coordinates of min(y, 0) on P (default all of V)."""
    if ell < 1:
        raise DomainError(f"neg_sum needs ell >= 1, got {ell}")
    y = np.asarray(y, dtype=float)
    values = y if P is None else y[to_indicator(P, y.shape[0])]
    negatives = np.sort(np.minimum(values, 0.0))
    return float(negatives[:ell].sum())
