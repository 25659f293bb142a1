"""
Extension maintainer.

Keeps W, D, the down-closures and the marginals of f^#R up to date under
contractions, discards and new arcs, and serves f^#R through ExtensionHandle.
Every mutating call ends in update_space, so extension marginals are
nonnegative on live elements between calls.
"""

import logging
from typing import Dict, Iterable, Mapping, Optional, Sequence, Set

import numpy as np

from lovasz.extension import Subgradient, as_order, partial_subgradient, subgradient
from oracle_core.instances import SubmodularInstance
from oracle_core.ledger import QueryLedger
from oracle_core.oracle import evaluate, evaluate_masks
from oracle_core.subsets import Subset, SubsetLike, to_indicator
from utils.errors import ConfigError, DomainError, InconsistentStateError
from utils.settings import TOLERANCE
from .handle import ExtensionHandle
from .state import RingFamilyState

logger = logging.getLogger("sparse_sfm")


class ExtensionMaintainer:
    """Owns the ring family for one solve; all ids are base-instance elements"""

    def __init__(self, inst: SubmodularInstance, k: int, ledger: Optional[QueryLedger] = None):
        if k < 1:
            raise ConfigError(f"Sparsity k must be at least 1, got {k}")
        self.inst = inst
        self.ledger = ledger if ledger is not None else QueryLedger()
        self.state = RingFamilyState.initial(inst.n, k)
        self.f_w = 0.0
        self.ignored_arcs = 0
        self._stale = True
        self._handle: Optional[ExtensionHandle] = None
        self.update_space((), ())

    # ---- accessors -----------------------------------------------------

    @property
    def k(self) -> int:
        return self.state.k

    @property
    def W(self) -> Subset:
        return Subset.from_indicator(self.state.W)

    @property
    def D(self) -> Subset:
        return Subset.from_indicator(self.state.D)

    def live_ids(self) -> np.ndarray:
        return self.state.live_ids()

    def down(self, p: int) -> Set[int]:
        return set(self.state.down[p])

    def u_ext_live(self) -> np.ndarray:
        return self.state.u_ext[self.state.live_ids()]

    def u_linf(self) -> float:
        u = self.u_ext_live()
        return float(np.abs(u).max()) if u.size else 0.0

    def handle(self) -> ExtensionHandle:
        """Frozen view of f^#R over the current live elements."""
        if self._handle is None:
            s = self.state
            self._handle = ExtensionHandle(self.inst, s.W, s.live_ids(), s.down, s.u_raw, self.f_w)
        return self._handle

    def check_invariants(self):
        return self.state.check_invariants()

    def snapshot(self) -> Dict:
        data = self.state.to_dict()
        data["f_W"] = self.f_w
        data["ignored_arcs"] = self.ignored_arcs
        return data

    # ---- updates -------------------------------------------------------

    def update_space(self, W_add: SubsetLike, D_add: SubsetLike):
        """Discard D_add with everything above it, contract the closures of W_add,
        then contract negative-marginal elements until none remain."""
        s = self.state
        w_add = to_indicator(W_add, s.n)
        d_add = to_indicator(D_add, s.n)
        if np.any(w_add & (s.D | d_add)):
            raise InconsistentStateError(f"Cannot contract discarded elements {np.flatnonzero(w_add & (s.D | d_add)).tolist()}")
        if np.any(d_add & s.W):
            raise InconsistentStateError(f"Cannot discard contracted elements {np.flatnonzero(d_add & s.W).tolist()}")

        self._discard(d_add)
        self._contract(w_add)
        while True:
            if self._stale:
                self._refresh(s.live_ids())
            negative = s.live & (s.u_ext < -TOLERANCE)
            if not negative.any():
                break
            logger.info("Contracting negative-marginal elements %s", np.flatnonzero(negative).tolist())
            self._contract(negative)

    def update_arcs(self, arcs: Mapping[int, Iterable[int]]):
        """Add arcs p -> q for q in arcs[p], close them for k rounds and discard
        elements whose closure outgrows the residual budget or meets D."""
        s = self.state
        promoted = np.zeros(s.n, dtype=bool)
        pending: Dict[int, Set[int]] = {}
        for p, targets in arcs.items():
            p = int(p)
            targets = {int(q) for q in targets} - {p}
            if not targets:
                continue
            if s.W[p]:
                for q in targets:
                    promoted[q] = not s.W[q] and not s.D[q]
            elif s.D[p]:
                self.ignored_arcs += len(targets)
                logger.warning("Ignoring %d arcs from discarded element %d", len(targets), p)
            else:
                pending[p] = targets

        if promoted.any():
            logger.info("Promoting arc targets of contracted elements %s", np.flatnonzero(promoted).tolist())
            self._contract(promoted)

        changed: Set[int] = set()
        doomed = np.zeros(s.n, dtype=bool)
        for p, targets in pending.items():
            if not s.live[p]:
                continue
            for q in targets:
                if s.W[q]:
                    continue
                if s.D[q]:
                    doomed[p] = True
                    break
                if q not in s.down[p]:
                    s.down[p].add(q)
                    s.reverse[q].add(p)
                    changed.add(p)

        changed |= self._close(changed)
        budget = s.residual_k
        for p in s.live_ids().tolist():
            if len(s.down[p]) > budget:
                doomed[p] = True
        if doomed.any():
            logger.info("Discarding elements with oversized or discarded closures: %s", np.flatnonzero(doomed).tolist())
        self._discard(doomed)

        if not self._stale:
            self._refresh(np.array(sorted(p for p in changed if s.live[p]), dtype=np.int64))
        self._handle = None
        self.update_space((), ())

    def _close(self, frontier: Set[int]) -> Set[int]:
        """k rounds of synchronous closure propagation; returns every element whose closure grew.

        An element is frozen once its closure exceeds the residual budget, since it will be discarded.
        """
        s = self.state
        budget = s.residual_k
        grown: Set[int] = set()
        # predecessors of a changed element must absorb its new arcs too
        frontier = set(frontier).union(*(s.reverse[p] for p in frontier))
        for _ in range(s.k):
            if not frontier:
                break
            updates: Dict[int, Set[int]] = {}
            for p in frontier:
                if not s.live[p] or len(s.down[p]) > budget:
                    continue
                extra = set().union(*(s.down[q] for q in s.down[p])) - s.down[p]
                if extra:
                    updates[p] = extra
            frontier = set()
            for p, extra in updates.items():
                s.down[p] |= extra
                for q in extra:
                    s.reverse[q].add(p)
                grown.add(p)
                frontier |= s.reverse[p] - {p}
                frontier.add(p)
        return grown

    def _discard(self, mask: np.ndarray):
        """D grows by mask and everything with an arc into it."""
        s = self.state
        queue = [int(p) for p in np.flatnonzero(mask & ~s.D)]
        while queue:
            q = queue.pop()
            if s.D[q]:
                continue
            if s.W[q]:
                raise InconsistentStateError(f"Element {q} is both forced into and out of the minimizer")
            s.D[q] = True
            for r in s.down.pop(q, ()):
                # r may already be discarded earlier in this cascade
                if r != q and r in s.reverse:
                    s.reverse[r].discard(q)
            for p in s.reverse.pop(q, ()):
                if p != q:
                    queue.append(p)
            s.u_raw[q] = s.u_ext[q] = 0.0
        self._handle = None

    def _contract(self, mask: np.ndarray):
        """W grows by the full closure of mask."""
        s = self.state
        queue = [int(p) for p in np.flatnonzero(mask & s.live)]
        members: Set[int] = set()
        while queue:
            p = queue.pop()
            if p in members or not s.live[p]:
                continue
            members.add(p)
            queue.extend(s.down[p] - members)
        if not members:
            return

        for m in members:
            s.W[m] = True
        for m in members:
            for r in s.down.pop(m, ()):
                if r not in members:
                    s.reverse[r].discard(m)
            for p in s.reverse.pop(m, ()):
                if p not in members:
                    s.down[p].discard(m)
            s.u_raw[m] = s.u_ext[m] = 0.0

        self.f_w = evaluate(self.inst, s.W, self.ledger)
        logger.debug("W now has %d elements, f(W) = %.6g", int(s.W.sum()), self.f_w)
        self._stale = True
        self._handle = None

    def _refresh(self, ids: np.ndarray):
        """u_raw(p) = f(W + p↓) - f(W + p↓ - p) for the given live ids, one batch."""
        s = self.state
        self._stale = False
        self._handle = None
        if ids.size == 0:
            return
        rows = []
        paired = []
        for p in ids.tolist():
            top = s.W.copy()
            top[list(s.down[p])] = True
            rows.append(top)
            if len(s.down[p]) > 1:
                below = top.copy()
                below[p] = False
                rows.append(below)
                paired.append(True)
            else:
                paired.append(False)
        values = evaluate_masks(self.inst, np.array(rows), self.ledger)

        cursor = 0
        for p, has_pair in zip(ids.tolist(), paired):
            if has_pair:
                s.u_raw[p] = values[cursor] - values[cursor + 1]
                cursor += 2
            else:
                s.u_raw[p] = values[cursor] - self.f_w
                cursor += 1
            single = len(s.down[p]) == 1
            s.u_ext[p] = s.u_raw[p] if single or s.u_raw[p] >= 0 else 0.0

    # ---- extension oracle ------------------------------------------------

    def closure_restrict(self, S: SubsetLike) -> Subset:
        """S# = {p in S : p↓ within S}; no queries."""
        s = self.state
        row = to_indicator(S, s.n)
        if np.any(row & ~s.live):
            raise DomainError(f"Elements {np.flatnonzero(row & ~s.live).tolist()} are not live")
        kept = [p for p in np.flatnonzero(row).tolist() if all(row[q] for q in s.down[p])]
        return Subset(s.n, kept)

    def ext_eval(self, S: SubsetLike, ledger: Optional[QueryLedger] = None) -> float:
        """f^#R(S) for live S, one base query."""
        row = to_indicator(S, self.state.n)
        if not row.any():
            return 0.0
        handle = self.handle()
        local = np.zeros(handle.n, dtype=bool)
        local[handle.to_local(np.flatnonzero(row))] = True
        return float(evaluate_masks(handle, local[None, :], ledger)[0])

    def ext_subgrad(self, pi: Sequence[int], ledger: Optional[QueryLedger] = None) -> Subgradient:
        """Subgradient of f^#R along a permutation of the live ids.

        g is indexed by base element (zero off the live set); source is the local permutation.
        """
        handle = self.handle()
        local = handle.to_local(pi)
        sg = subgradient(handle, as_order(local), ledger)
        g = np.zeros(self.state.n)
        g[handle.live_ids] = sg.g
        return Subgradient(g=g, source=sg.source, prefix_values=sg.prefix_values)

    def ext_partial(self, i: int, pi: Sequence[int], ledger: Optional[QueryLedger] = None) -> float:
        """One coordinate of ext_subgrad from at most two queries."""
        handle = self.handle()
        local = handle.to_local(pi)
        (i_local,) = handle.to_local([i])
        return partial_subgradient(handle, as_order(local), int(i_local), ledger)
