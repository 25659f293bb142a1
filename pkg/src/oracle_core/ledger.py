"""
Query ledger: counts evaluation-oracle calls and adaptive rounds.

A batch of b sets costs b queries and one round. Concurrent jobs each write to
a forked sub-ledger; joining them adds the summed queries and the maximum of
their rounds, which is how parallel depth composes.
"""

import threading
from contextlib import contextmanager
from typing import Dict, Iterable, Iterator


class QueryLedger:
    """Thread-safe, monotone query/round counter with labelled phases"""

    def __init__(self, label: str = "total"):
        self.label = label
        self._queries = 0
        self._rounds = 0
        self.per_phase: Dict[str, Dict[str, int]] = {}
        self._lock = threading.Lock()

    @property
    def queries(self) -> int:
        return self._queries

    @property
    def rounds(self) -> int:
        return self._rounds

    def record(self, queries: int, rounds: int = 1):
        """Charge one batch of queries."""
        if queries <= 0:
            return
        rounds = min(max(rounds, 0), queries)
        with self._lock:
            self._queries += queries
            self._rounds += rounds

    def fork(self, label: str) -> "QueryLedger":
        """Detached sub-ledger for one job; merge it back with join."""
        return QueryLedger(label)

    def join(self, children: Iterable["QueryLedger"], parallel: bool = True):
        """Merge finished sub-ledgers. Parallel jobs cost the max of their rounds."""
        children = list(children)
        if not children:
            return
        queries = sum(child.queries for child in children)
        if parallel:
            rounds = max(child.rounds for child in children)
        else:
            rounds = sum(child.rounds for child in children)

        with self._lock:
            self._queries += queries
            self._rounds += rounds
            for child in children:
                self._add_phase(child.label, child.queries, child.rounds)
                for label, totals in child.per_phase.items():
                    self._add_phase(label, totals["queries"], totals["rounds"])

    def _add_phase(self, label: str, queries: int, rounds: int):
        totals = self.per_phase.setdefault(label, {"queries": 0, "rounds": 0})
        totals["queries"] += queries
        totals["rounds"] += rounds

    @contextmanager
    def phase(self, label: str) -> Iterator["QueryLedger"]:
        """Run a sequential phase on its own sub-ledger."""
        child = self.fork(label)
        try:
            yield child
        finally:
            self.join([child], parallel=False)

    def snapshot(self) -> Dict[str, int]:
        return {"queries": self._queries, "rounds": self._rounds}

    def to_dict(self) -> Dict:
        return {
            "queries": self._queries,
            "rounds": self._rounds,
            "per_phase": {label: dict(totals) for label, totals in sorted(self.per_phase.items())},
        }

    def __repr__(self) -> str:
        return f"QueryLedger(label={self.label!r}, queries={self._queries}, rounds={self._rounds})"
