"""
Submodular instance definitions.

Every instance evaluates batches of indicator rows in one vectorised call.
The raw value of the empty set is stored as `offset` at ingestion and
subtracted from every value, so values() of the empty set is exactly 0.
values() is uncharged; accounted access goes through oracle_core.oracle.
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from utils.errors import ConfigError
from utils.settings import TOLERANCE
from .subsets import GroundSet, mask_codes, mask_rows

EXPLICIT_LIMIT = 20
TABLE_CHUNK = 1 << 16


class SubmodularInstance(ABC):
    """Base class for all set functions served through the evaluation oracle"""

    kind: str = ""

    def __init__(self, n: int):
        self.ground = GroundSet(int(n))
        self.offset = 0.0
        self._cache: Optional[Dict[bytes, float]] = None
        self.planted_minimizer = None  # set by the planted generator

    @property
    def n(self) -> int:
        return self.ground.n

    def _ingest(self):
        """Record the raw empty-set value; call at the end of __init__."""
        self.offset = float(self._raw_values(np.zeros((1, self.n), dtype=bool))[0])

    @abstractmethod
    def _raw_values(self, masks: np.ndarray) -> np.ndarray:
        """Raw values of each boolean row of masks (shape b x n)."""
        pass

    @abstractmethod
    def params(self) -> Dict[str, Any]:
        """Kind-specific parameters as JSON-compatible data"""
        pass

    def values(self, masks: np.ndarray) -> np.ndarray:
        """Normalised values of a batch of indicator rows, without accounting."""
        masks = np.asarray(masks, dtype=bool)
        if masks.ndim == 1:
            masks = masks[None, :]
        if masks.shape[0] == 0:
            return np.zeros(0)
        if self._cache is None:
            return self._raw_values(masks) - self.offset

        out = np.empty(masks.shape[0])
        missing = []
        for row, mask in enumerate(masks):
            key = np.packbits(mask).tobytes()
            if key in self._cache:
                out[row] = self._cache[key]
            else:
                missing.append(row)
        if missing:
            fresh = self._raw_values(masks[missing]) - self.offset
            for row, value in zip(missing, fresh):
                out[row] = value
                self._cache[np.packbits(masks[row]).tobytes()] = float(value)
        return out

    def enable_cache(self):
        """Memoise values. Ledger counts are unaffected."""
        if self._cache is None:
            self._cache = {}

    def disable_cache(self):
        self._cache = None

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n})"


class CutInstance(SubmodularInstance):
    """Weighted undirected cut function: total weight of edges leaving S"""

    kind = "cut"

    def __init__(self, n: int, edges: Sequence[Sequence[int]], weights: Optional[Sequence[float]] = None):
        super().__init__(n)
        edge_array = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if weights is None:
            weights = np.ones(edge_array.shape[0])
        weight_array = np.asarray(weights, dtype=float)
        if weight_array.shape != (edge_array.shape[0],):
            raise ConfigError("Cut instance needs one weight per edge")
        if edge_array.size and (edge_array.min() < 0 or edge_array.max() >= n):
            raise ConfigError(f"Edge endpoint outside ground set of size {n}")
        if np.any(edge_array[:, 0] == edge_array[:, 1]):
            raise ConfigError("Self loops are not allowed in a cut instance")
        if np.any(weight_array < 0):
            raise ConfigError("Cut weights must be nonnegative")
        self.edges = edge_array
        self.weights = weight_array
        self._ingest()

    def _raw_values(self, masks: np.ndarray) -> np.ndarray:
        if self.edges.shape[0] == 0:
            return np.zeros(masks.shape[0])
        crossing = masks[:, self.edges[:, 0]] != masks[:, self.edges[:, 1]]
        return crossing.astype(float) @ self.weights

    def params(self) -> Dict[str, Any]:
        return {"edges": self.edges.tolist(), "weights": self.weights.tolist()}


class CoverageInstance(SubmodularInstance):
    """Weighted coverage plus a modular penalty.

    Element p covers the items covers[p]; f(S) is the weight of the items
    covered by S plus the sum of penalty over S.
    """

    kind = "coverage"

    def __init__(self, covers: Sequence[Sequence[int]], item_weights: Sequence[float],
                 penalty: Optional[Sequence[float]] = None):
        super().__init__(len(covers))
        self.item_weights = np.asarray(item_weights, dtype=float)
        if np.any(self.item_weights < 0):
            raise ConfigError("Coverage item weights must be nonnegative")
        m = self.item_weights.shape[0]
        self.covers = [sorted({int(i) for i in items}) for items in covers]
        incidence = np.zeros((self.n, m))
        for p, items in enumerate(self.covers):
            if items and (items[0] < 0 or items[-1] >= m):
                raise ConfigError(f"Element {p} covers an item outside 0..{m - 1}")
            incidence[p, items] = 1.0
        self._incidence = incidence
        self.penalty = np.zeros(self.n) if penalty is None else np.asarray(penalty, dtype=float)
        if self.penalty.shape != (self.n,):
            raise ConfigError("Coverage penalty needs one entry per element")
        self._ingest()

    def _raw_values(self, masks: np.ndarray) -> np.ndarray:
        rows = masks.astype(float)
        covered = (rows @ self._incidence) > 0
        return covered.astype(float) @ self.item_weights + rows @ self.penalty

    def params(self) -> Dict[str, Any]:
        return {
            "covers": [list(items) for items in self.covers],
            "item_weights": self.item_weights.tolist(),
            "penalty": self.penalty.tolist(),
        }


class ModularPlusConcaveInstance(SubmodularInstance):
    """f(S) = x(S) + c(|S|) with c concave on 0..n"""

    kind = "modular_plus_concave"

    def __init__(self, modular: Sequence[float], concave: Optional[Sequence[float]] = None):
        modular_array = np.asarray(modular, dtype=float)
        super().__init__(modular_array.shape[0])
        self.modular = modular_array
        self.concave = np.zeros(self.n + 1) if concave is None else np.asarray(concave, dtype=float)
        if self.concave.shape != (self.n + 1,):
            raise ConfigError(f"Concave table needs n+1={self.n + 1} entries")
        steps = np.diff(self.concave)
        if np.any(np.diff(steps) > TOLERANCE):
            raise ConfigError("Concave table must have nonincreasing increments")
        self._ingest()

    def _raw_values(self, masks: np.ndarray) -> np.ndarray:
        return masks.astype(float) @ self.modular + self.concave[masks.sum(axis=1)]

    def params(self) -> Dict[str, Any]:
        return {"modular": self.modular.tolist(), "concave": self.concave.tolist()}


class ExplicitInstance(SubmodularInstance):
    """Full value table of length 2^n in mask order"""

    kind = "explicit"

    def __init__(self, n: int, table: Sequence[float], check: bool = True):
        super().__init__(n)
        if self.n > EXPLICIT_LIMIT:
            raise ConfigError(f"Explicit tables are limited to n <= {EXPLICIT_LIMIT}")
        self.table = np.asarray(table, dtype=float)
        if self.table.shape != (1 << self.n,):
            raise ConfigError(f"Explicit table for n={self.n} needs {1 << self.n} values")
        self._ingest()
        if check:
            gap = submodularity_gap(self.table - self.offset, self.n)
            if gap < -TOLERANCE:
                raise ConfigError(f"Explicit table is not submodular (worst local gap {gap:.3g})")

    def _raw_values(self, masks: np.ndarray) -> np.ndarray:
        return self.table[mask_codes(masks)]

    def params(self) -> Dict[str, Any]:
        return {"table": self.table.tolist()}


class ContractedInstance(SubmodularInstance):
    """f_P(S) = f(S + P) - f(P) over the elements outside P.

    Local element i stands for base element kept[i]. Each evaluation uses
    exactly one base value; f(P) is fixed at construction.
    """

    kind = "contracted"

    def __init__(self, base: SubmodularInstance, contracted: np.ndarray, base_value: float):
        contracted = np.asarray(contracted, dtype=bool)
        kept = np.flatnonzero(~contracted)
        if kept.size == 0:
            raise ConfigError("Contraction must leave at least one element")
        super().__init__(kept.size)
        self.base = base
        self.contracted = contracted
        self.kept = kept
        self.base_value = float(base_value)
        self._ingest()

    def lift(self, masks: np.ndarray) -> np.ndarray:
        """Base-ground rows for local rows, with P added."""
        rows = np.zeros((masks.shape[0], self.base.n), dtype=bool)
        rows[:, self.contracted] = True
        rows[:, self.kept] = masks
        return rows

    def _raw_values(self, masks: np.ndarray) -> np.ndarray:
        return self.base.values(self.lift(masks)) - self.base_value

    def params(self) -> Dict[str, Any]:
        return {"contracted": np.flatnonzero(self.contracted).tolist(), "base_kind": self.base.kind}


def submodularity_gap(table: np.ndarray, n: int) -> float:
    """Smallest f(S+i) + f(S+j) - f(S+i+j) - f(S) over S and i, j outside S.

    Nonnegative exactly when the table is submodular; the pairwise local
    condition is equivalent to diminishing returns over all S subset T.
    """
    if n < 2:
        return 0.0
    codes = np.arange(1 << n, dtype=np.int64)
    worst = np.inf
    for i in range(n):
        bit_i = 1 << i
        for j in range(i + 1, n):
            bit_j = 1 << j
            base = codes[(codes & (bit_i | bit_j)) == 0]
            gap = table[base | bit_i] + table[base | bit_j] - table[base | bit_i | bit_j] - table[base]
            worst = min(worst, float(gap.min()))
    return worst


def all_values(inst: SubmodularInstance) -> np.ndarray:
    """Normalised values of all 2^n sets in mask order (uncharged)."""
    chunks: List[np.ndarray] = []
    total = 1 << inst.n
    for start in range(0, total, TABLE_CHUNK):
        chunks.append(inst.values(mask_rows(inst.n, start, min(total, start + TABLE_CHUNK))))
    return np.concatenate(chunks)


INSTANCE_KINDS = {
    CutInstance.kind: CutInstance,
    CoverageInstance.kind: CoverageInstance,
    ModularPlusConcaveInstance.kind: ModularPlusConcaveInstance,
    ExplicitInstance.kind: ExplicitInstance,
}
