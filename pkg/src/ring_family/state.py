"""
Ring family state: contracted set W, discarded set D and the down-closures p↓
of every live element (live = neither contracted nor discarded).
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Set

import numpy as np

from utils.settings import TOLERANCE


@dataclass
class RingFamilyState:
    """Arcs are stored as down-closures: q in down[p] means every k-sparse
    minimizer containing p also contains q. reverse is the exact inverse of down."""
    k: int
    W: np.ndarray
    D: np.ndarray
    down: Dict[int, Set[int]] = field(default_factory=dict)
    reverse: Dict[int, Set[int]] = field(default_factory=dict)
    u_raw: np.ndarray = None
    u_ext: np.ndarray = None

    @classmethod
    def initial(cls, n: int, k: int) -> "RingFamilyState":
        return cls(
            k=k,
            W=np.zeros(n, dtype=bool),
            D=np.zeros(n, dtype=bool),
            down={p: {p} for p in range(n)},
            reverse={p: {p} for p in range(n)},
            u_raw=np.zeros(n),
            u_ext=np.zeros(n),
        )

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @property
    def live(self) -> np.ndarray:
        return ~(self.W | self.D)

    def live_ids(self) -> np.ndarray:
        return np.flatnonzero(self.live)

    @property
    def residual_k(self) -> int:
        """Sparsity left for live elements once W is accounted for"""
        return self.k - int(self.W.sum())

    def check_invariants(self) -> List[str]:
        """Every violated invariant as a message; empty when the state is sound."""
        problems = []
        if np.any(self.W & self.D):
            problems.append(f"W and D intersect at {np.flatnonzero(self.W & self.D).tolist()}")
        live = self.live
        if set(self.down) != set(np.flatnonzero(live).tolist()):
            problems.append("down-closures are not kept for exactly the live elements")

        for p, closure in self.down.items():
            if p not in closure:
                problems.append(f"{p} missing from its own down-closure")
            if len(closure) > self.k:
                problems.append(f"down-closure of {p} has {len(closure)} > k={self.k} elements")
            dead = [q for q in closure if not live[q]]
            if dead:
                problems.append(f"down-closure of {p} contains dead elements {sorted(dead)}")
            for q in closure:
                if p not in self.reverse.get(q, ()):
                    problems.append(f"reverse map lacks {p} under {q}")
        for q, sources in self.reverse.items():
            for p in sources:
                if q not in self.down.get(p, ()):
                    problems.append(f"reverse map has stale entry {p} under {q}")

        negative = np.flatnonzero(live & (self.u_ext < -TOLERANCE))
        if negative.size:
            problems.append(f"negative extension marginals at {negative.tolist()}")
        return problems

    def to_dict(self) -> Dict[str, Any]:
        live = self.live_ids()
        return {
            "k": self.k,
            "W": np.flatnonzero(self.W).tolist(),
            "D": np.flatnonzero(self.D).tolist(),
            "down": {str(p): sorted(self.down[p]) for p in live.tolist()},
            "u_raw": {str(p): float(self.u_raw[p]) for p in live.tolist()},
            "u_ext": {str(p): float(self.u_ext[p]) for p in live.tolist()},
        }
