"""
Deterministic parallel pipeline.

Dual certificates come from mirror descent over S_{k+1} with truncated
subgradients; each iteration is one batch of n prefix queries. Dimensionality
reduction sweeps the lower bound phi by halving, and arc finding runs one
dimensionality reduction per active element on the contracted extension.
Independent jobs write to forked ledgers joined as parallel work.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Set

import numpy as np

from lovasz.certificates import CertificateBundle
from lovasz.extension import neg_sum, permutation_of, subgradient
from oracle_core.instances import SubmodularInstance
from oracle_core.ledger import QueryLedger
from oracle_core.oracle import MarginalSummary, contract, marginal_summary
from oracle_core.subsets import Subset
from ring_family.handle import ExtensionHandle
from simplex.online import mirror_descent
from utils.errors import ConfigError
from utils.settings import TOLERANCE, ConstantProfile, get_profile
from .jobs import log_n, phi_schedule, run_jobs

logger = logging.getLogger("sparse_sfm")


@dataclass
class TruncatedCertificate:
    """Averaged truncated subgradients y and the permutations that produced them"""
    y: np.ndarray
    bundle: CertificateBundle
    iterations: int
    s: float
    m: int
    eta: float
    best_value: float
    stopped_early: bool = False


def truncate(g: np.ndarray, s: float) -> np.ndarray:
    """Coordinatewise max(-s, g)."""
    if s <= 0:
        raise ConfigError(f"Truncation threshold must be positive, got {s}")
    return np.maximum(np.asarray(g, dtype=float), -s)


def dual_certificate_truncated(inst: SubmodularInstance, k: int, phi: float, delta: float,
                               ledger: Optional[QueryLedger] = None, profile: Optional[ConstantProfile] = None,
                               summary: Optional[MarginalSummary] = None) -> TruncatedCertificate:
    """(delta, k) dual certificate for f, given the lower bound f* >= -phi and u_f >= 0."""
    if delta <= 0:
        raise ConfigError(f"Certificate accuracy delta must be positive, got {delta}")
    if phi < 0:
        raise ConfigError(f"Lower bound phi must be nonnegative, got {phi}")
    profile = profile or get_profile()
    summary = summary or marginal_summary(inst, ledger)
    n = inst.n

    s = k * summary.linf + phi
    if s <= TOLERANCE:
        # u = 0 and phi = 0: f is identically zero on sparse sets
        identity = np.arange(n)
        return TruncatedCertificate(np.zeros(n), CertificateBundle.uniform([identity]), 0, s, 0, 0.0, 0.0)

    m = profile.cap(profile.c_m * s ** 2 * k * (k + 1) * log_n(n) / delta ** 2, profile.max_md_iterations)
    eta = 2.0 * math.sqrt(k * log_n(n)) / (s * math.sqrt(m * (k + 1)))
    x0 = np.full(n, min(k, n) / n)

    total = np.zeros(n)
    best = 0.0
    permutations: List[np.ndarray] = []

    def truncated_gradient(x: np.ndarray, t: int) -> np.ndarray:
        nonlocal total, best
        sg = subgradient(inst, permutation_of(x), ledger)
        h = truncate(sg.g, s)
        total += h
        best = min(best, sg.best_prefix_value())
        permutations.append(sg.source.order)
        return h

    def certified(t: int, x: np.ndarray) -> bool:
        # best is f of a queried set, so it bounds f* from above
        return neg_sum(total / (t + 1), k + 1) + delta >= best - TOLERANCE

    trace = mirror_descent(truncated_gradient, k + 1, x0, eta, m,
                           stop=certified if profile.early_exit else None, record=False)
    y = total / trace.iterations
    logger.debug("Truncated certificate: phi=%.4g delta=%.4g s=%.4g m=%d ran=%d early=%s",
                 phi, delta, s, m, trace.iterations, trace.stopped_early)
    return TruncatedCertificate(y, CertificateBundle.uniform(permutations), trace.iterations, s, m, eta,
                                best, trace.stopped_early)


def dim_reduction_parallel(inst: SubmodularInstance, k: int, ledger: Optional[QueryLedger] = None,
                           profile: Optional[ConstantProfile] = None,
                           summary: Optional[MarginalSummary] = None) -> Subset:
    """Elements in every minimizer of f; empty certifies f* > -||u||_inf / divisor."""
    profile = profile or get_profile()
    ledger = ledger if ledger is not None else QueryLedger()
    summary = summary or marginal_summary(inst, ledger)

    negative = summary.u < -TOLERANCE
    if negative.any():
        return Subset.from_indicator(negative)
    if summary.linf <= TOLERANCE:
        return Subset(inst.n)

    schedule = phi_schedule(summary, profile.parallel_divisor)
    logger.debug("Parallel dimensionality reduction over %d phi rounds from %.4g", len(schedule),
                 schedule[0] if schedule else 0.0)

    def round_job(phi: float):
        def job(child: QueryLedger) -> np.ndarray:
            delta = phi / (3 * k)
            cert = dual_certificate_truncated(inst, k, phi, delta, child, profile, summary)
            return cert.y < -delta
        return job

    if profile.fan_out_rounds:
        jobs = {i: round_job(phi) for i, phi in enumerate(schedule)}
        results = run_jobs(jobs, ledger, profile.max_workers, "dim_reduction")
        for i, phi in enumerate(schedule):
            found = results[i]
            if found.any():
                logger.debug("Dimensionality reduction at phi=%.4g: %s", phi, np.flatnonzero(found).tolist())
                return Subset.from_indicator(found)
        return Subset(inst.n)

    for i, phi in enumerate(schedule):
        with ledger.phase("dim_reduction") as child:
            found = round_job(phi)(child)
        if found.any():
            logger.debug("Dimensionality reduction at phi=%.4g: %s", phi, np.flatnonzero(found).tolist())
            return Subset.from_indicator(found)
    return Subset(inst.n)


def arc_finding_parallel(handle: SubmodularInstance, k: int, scale: float, ledger: Optional[QueryLedger] = None,
                         profile: Optional[ConstantProfile] = None,
                         summary: Optional[MarginalSummary] = None) -> Dict[int, Set[int]]:
    """Arc targets S_p for every element with u_p >= scale / 2, in the handle's local ids.

    An empty S_p means p lies in no k-sparse minimizer.
    """
    profile = profile or get_profile()
    ledger = ledger if ledger is not None else QueryLedger()
    summary = summary or marginal_summary(handle, ledger)
    active = np.flatnonzero(summary.u >= scale / 2.0).tolist()
    if not active:
        return {}

    arcs: Dict[int, Set[int]] = {}

    def element_job(i: int, closure: np.ndarray):
        def job(child: QueryLedger) -> Set[int]:
            mask = np.zeros(handle.n, dtype=bool)
            mask[closure] = True
            contracted = contract(handle, mask, child)
            found = dim_reduction_parallel(contracted, k - closure.size, child, profile)
            return {int(contracted.kept[q]) for q in found}
        return job

    jobs = {}
    for i in active:
        closure = handle.down_of(i) if isinstance(handle, ExtensionHandle) else np.array([i])
        if k - closure.size <= 0 or closure.size >= handle.n:
            logger.debug("Element %d has no sparsity left below it; reporting for discard", i)
            arcs[i] = set()
        else:
            jobs[i] = element_job(i, closure)

    arcs.update(run_jobs(jobs, ledger, profile.max_workers, "arc_finding"))
    return arcs
