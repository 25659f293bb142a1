"""
Ground sets and subsets.

A Subset keeps its members as a sorted tuple and, for ground sets of at most
64 elements, also as a bitmask (bit i set iff element i is a member). Both
representations compare equal. Oracles work on boolean indicator rows, so
batches of sets travel as 2D boolean arrays.
"""

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Optional, Sequence, Union

import numpy as np

from utils.errors import MalformedSubsetError

MASK_LIMIT = 64


@dataclass(frozen=True)
class GroundSet:
    """Elements are the indices 0..n-1"""
    n: int

    def __post_init__(self):
        if int(self.n) < 1:
            raise MalformedSubsetError(f"Ground set needs at least one element, got n={self.n}")

    def elements(self) -> range:
        return range(self.n)

    def empty(self) -> "Subset":
        return Subset(self.n)

    def full(self) -> "Subset":
        return Subset(self.n, range(self.n))


class Subset:
    """Immutable subset of a ground set of size n"""

    __slots__ = ("n", "_members", "_mask")

    def __init__(self, n: int, members: Iterable[int] = ()):
        items = sorted({int(i) for i in members})
        if items and (items[0] < 0 or items[-1] >= n):
            raise MalformedSubsetError(f"Subset {items} is not contained in a ground set of size {n}")
        self.n = int(n)
        self._members = tuple(items)
        self._mask: Optional[int] = None
        if self.n <= MASK_LIMIT:
            mask = 0
            for i in items:
                mask |= 1 << i
            self._mask = mask

    @classmethod
    def from_mask(cls, n: int, mask: int) -> "Subset":
        if mask < 0 or mask >> n:
            raise MalformedSubsetError(f"Mask {mask} has bits outside a ground set of size {n}")
        return cls(n, (i for i in range(n) if mask >> i & 1))

    @classmethod
    def from_indicator(cls, indicator: np.ndarray) -> "Subset":
        indicator = np.asarray(indicator, dtype=bool)
        return cls(indicator.shape[0], np.flatnonzero(indicator).tolist())

    @property
    def members(self) -> tuple:
        return self._members

    @property
    def mask(self) -> int:
        if self._mask is not None:
            return self._mask
        return sum(1 << i for i in self._members)

    def indicator(self) -> np.ndarray:
        row = np.zeros(self.n, dtype=bool)
        row[list(self._members)] = True
        return row

    def __len__(self) -> int:
        return len(self._members)

    def __iter__(self) -> Iterator[int]:
        return iter(self._members)

    def __contains__(self, item) -> bool:
        if self._mask is not None:
            return 0 <= int(item) < self.n and bool(self._mask >> int(item) & 1)
        return int(item) in set(self._members)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subset):
            return NotImplemented
        return self.n == other.n and self._members == other._members

    def __hash__(self) -> int:
        return hash((self.n, self._members))

    def __or__(self, other: "Subset") -> "Subset":
        return Subset(self.n, set(self._members) | set(other))

    def __and__(self, other: "Subset") -> "Subset":
        return Subset(self.n, set(self._members) & set(other))

    def __sub__(self, other: "Subset") -> "Subset":
        return Subset(self.n, set(self._members) - set(other))

    def complement(self) -> "Subset":
        return Subset(self.n, set(range(self.n)) - set(self._members))

    def issubset(self, other: "Subset") -> bool:
        return set(self._members) <= set(other)

    def to_list(self) -> list:
        return list(self._members)

    def __repr__(self) -> str:
        return f"Subset(n={self.n}, members={list(self._members)})"


SubsetLike = Union[Subset, np.ndarray, Sequence[int], Iterable[int]]


def to_indicator(S: SubsetLike, n: int) -> np.ndarray:
    """Boolean row for S over a ground set of size n."""
    if isinstance(S, Subset):
        if S.n != n:
            raise MalformedSubsetError(f"Subset over n={S.n} used with a ground set of size {n}")
        return S.indicator()
    if isinstance(S, np.ndarray) and S.dtype == bool:
        if S.shape != (n,):
            raise MalformedSubsetError(f"Indicator of shape {S.shape} used with a ground set of size {n}")
        return S.copy()
    items = np.asarray(list(S), dtype=np.int64)
    if items.size and (items.min() < 0 or items.max() >= n):
        raise MalformedSubsetError(f"Subset {items.tolist()} is not contained in a ground set of size {n}")
    row = np.zeros(n, dtype=bool)
    row[items] = True
    return row


def to_matrix(sets: Sequence[SubsetLike], n: int) -> np.ndarray:
    """Stack subsets into a (len(sets), n) boolean matrix."""
    if len(sets) == 0:
        return np.zeros((0, n), dtype=bool)
    return np.vstack([to_indicator(S, n) for S in sets])


def mask_rows(n: int, start: int, stop: int) -> np.ndarray:
    """Indicator rows of the masks start..stop-1 (bit i = element i)."""
    codes = np.arange(start, stop, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(bool)


def mask_codes(masks: np.ndarray) -> np.ndarray:
    """Inverse of mask_rows for n <= 62."""
    n = masks.shape[1]
    return masks.astype(np.int64) @ (np.int64(1) << np.arange(n, dtype=np.int64))


def sparse_rows(n: int, k: int, chunk: int = 4096) -> Iterator[np.ndarray]:
    """Yield indicator rows of every set of size at most k, in chunks."""
    buffer = [np.zeros(n, dtype=bool)]
    for size in range(1, min(k, n) + 1):
        for combo in combinations(range(n), size):
            row = np.zeros(n, dtype=bool)
            row[list(combo)] = True
            buffer.append(row)
            if len(buffer) >= chunk:
                yield np.vstack(buffer)
                buffer = []
    if buffer:
        yield np.vstack(buffer)
