"""
Helpers shared by both solver pipelines: the phi halving schedule and the
runner for independent jobs on forked ledgers.
"""

import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Dict, Hashable, List

from oracle_core.ledger import QueryLedger
from oracle_core.oracle import MarginalSummary
from utils.settings import TOLERANCE


def log_n(n: int) -> float:
    """Natural log of max(n, 2)"""
    return math.log(max(n, 2))


def phi_schedule(summary: MarginalSummary, divisor: float) -> List[float]:
    """phi from ||u||_1 - f(V), halving while phi >= ||u||_inf / divisor."""
    floor = max(summary.linf / divisor, TOLERANCE)
    phi = summary.l1 - summary.full_value
    schedule = []
    while phi >= floor:
        schedule.append(phi)
        phi /= 2.0
    return schedule


def run_jobs(jobs: Dict[Hashable, Callable[[QueryLedger], object]], ledger: QueryLedger, max_workers: int,
             label: str, parallel: bool = True) -> Dict[Hashable, object]:
    """Run independent jobs, each on its own forked ledger, then join the ledgers."""
    children = {key: ledger.fork(label) for key in jobs}
    results: Dict[Hashable, object] = {}
    if max_workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            future_to_key = {
                executor.submit(job, children[key]): key
                for key, job in jobs.items()
            }
            for future in as_completed(future_to_key):
                results[future_to_key[future]] = future.result()
    else:
        for key, job in jobs.items():
            results[key] = job(children[key])
    ledger.join(children.values(), parallel=parallel)
    return results
