"""
The extension f^#R as an instance over the live elements.

Local element i stands for the base element live_ids[i]. A handle is a frozen
view of the maintainer at the time it was taken; take a new one after every
update.
"""

from typing import Any, Dict, Iterable

import numpy as np

from oracle_core.instances import SubmodularInstance
from utils.errors import DomainError, InconsistentStateError


class ExtensionHandle(SubmodularInstance):
    """f^#R(S) = f(W + S#) - f(W) + sum of max(0, u_raw) over S - S#,
    where S# = {p in S : p↓ within S}. One base value per evaluation."""

    kind = "extension"

    def __init__(self, base: SubmodularInstance, W: np.ndarray, live_ids: np.ndarray,
                 down: Dict[int, Iterable[int]], u_raw: np.ndarray, f_w: float):
        if live_ids.size == 0:
            raise InconsistentStateError("Extension has no live elements")
        super().__init__(live_ids.size)
        self.base = base
        self.W = np.asarray(W, dtype=bool).copy()
        self.live_ids = np.asarray(live_ids, dtype=np.int64)
        self.f_w = float(f_w)
        self._local = {int(p): i for i, p in enumerate(self.live_ids)}

        closures = [sorted(self._local[int(q)] for q in down[int(p)]) for p in self.live_ids]
        width = max(len(c) for c in closures)
        # rows padded with the element itself, which is always in its own closure
        self.down_local = np.array([c + [i] * (width - len(c)) for i, c in enumerate(closures)], dtype=np.int64)
        self.u_plus = np.maximum(0.0, np.asarray(u_raw, dtype=float)[self.live_ids])
        self._ingest()

    def to_local(self, ids: Iterable[int]) -> np.ndarray:
        try:
            return np.array([self._local[int(p)] for p in ids], dtype=np.int64)
        except KeyError as e:
            raise DomainError(f"Element {e.args[0]} is not live in this extension") from e

    def to_global(self, local: Iterable[int]) -> np.ndarray:
        return self.live_ids[np.asarray(list(local), dtype=np.int64)]

    def down_of(self, i: int) -> np.ndarray:
        """Local down-closure of local element i."""
        return np.unique(self.down_local[i])

    def closure(self, masks: np.ndarray) -> np.ndarray:
        """Row-wise S# for local indicator rows."""
        masks = np.asarray(masks, dtype=bool)
        return masks & np.all(masks[:, self.down_local], axis=2)

    def _base_rows(self, closed: np.ndarray) -> np.ndarray:
        rows = np.zeros((closed.shape[0], self.base.n), dtype=bool)
        rows[:, self.W] = True
        rows[:, self.live_ids] = closed
        return rows

    def lift(self, masks: np.ndarray) -> np.ndarray:
        """Base rows W + S# for local rows S."""
        return self._base_rows(self.closure(masks))

    def _raw_values(self, masks: np.ndarray) -> np.ndarray:
        closed = self.closure(masks)
        return self.base.values(self._base_rows(closed)) - self.f_w + (masks & ~closed).astype(float) @ self.u_plus

    def params(self) -> Dict[str, Any]:
        return {
            "live": self.live_ids.tolist(),
            "W": np.flatnonzero(self.W).tolist(),
            "down": [self.down_of(i).tolist() for i in range(self.n)],
        }
