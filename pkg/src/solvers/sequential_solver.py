"""
Randomized sequential pipeline.

Certificates come from FTRL over S_k driven by one-coordinate gradient
estimates (vSampling), so an iteration costs O(log n) queries instead of n.
The FTRL iterate is never materialized: only its order matters, and that is
the order of the cumulative estimate. Dimensionality reduction and arc finding
read the certificate through sampling as well.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from lovasz.certificates import CertificateBundle
from lovasz.extension import PermutationLike, as_order
from oracle_core.instances import SubmodularInstance
from oracle_core.ledger import QueryLedger
from oracle_core.oracle import MarginalSummary, evaluate, evaluate_masks, marginal_summary
from oracle_core.rng import RngStream
from oracle_core.subsets import Subset
from ring_family.handle import ExtensionHandle
from simplex.entropy import implied_permutation
from simplex.online import STEP_GUARD
from utils.errors import ConfigError, InvariantError, StepSizeError
from utils.settings import TOLERANCE, ConstantProfile, get_profile
from .jobs import log_n, phi_schedule, run_jobs

logger = logging.getLogger("sparse_sfm")


@dataclass
class VSample:
    """One draw of vSampling: coordinate j with probability v_j / ||v||_1 and the
    unbiased estimate g_j / P(j) of the subgradient at that coordinate"""
    coordinate: int
    value: float
    probability: float
    gradient_value: float


@dataclass
class FTRLRun:
    bundle: CertificateBundle
    iterations: int
    eta: float
    u_inf: float
    u_one: float


class _Prefixes:
    """Lazily queried prefix values f(pi[i]) of one permutation"""

    def __init__(self, inst: SubmodularInstance, order: np.ndarray, ledger: Optional[QueryLedger],
                 full_value: float):
        n = order.shape[0]
        self.inst = inst
        self.order = order
        self.ledger = ledger
        self.pos = np.empty(n, dtype=np.int64)
        self.pos[order] = np.arange(n)
        self.cache: Dict[int, float] = {0: 0.0, n: float(full_value)}

    def row(self, i: int) -> np.ndarray:
        return self.pos < i

    def fetch(self, lengths: Sequence[int]):
        """Query every missing prefix in one batch."""
        missing = sorted({int(i) for i in lengths} - set(self.cache))
        if not missing:
            return
        values = evaluate_masks(self.inst, np.array([self.row(i) for i in missing]), self.ledger)
        self.cache.update(zip(missing, values.tolist()))

    def value(self, i: int) -> float:
        self.fetch([i])
        return self.cache[int(i)]


def _draw_index(bundle: CertificateBundle, rng: RngStream) -> int:
    m = len(bundle)
    if np.allclose(bundle.weights, 1.0 / m):
        return rng.index(m)
    cumulative = np.cumsum(bundle.weights)
    return min(int(np.searchsorted(cumulative, rng.uniform(), side="right")), m - 1)


def v_sampling(inst: SubmodularInstance, pi: PermutationLike, rng: RngStream,
               ledger: Optional[QueryLedger] = None, summary: Optional[MarginalSummary] = None) -> VSample:
    """Sample j with probability proportional to v_j = 2 u_j - (g_pi)_j by binary search
    on prefix sums; one query per probe."""
    summary = summary or marginal_summary(inst, ledger)
    order = as_order(pi)
    n = order.shape[0]
    total = summary.sampling_mass
    if total <= TOLERANCE:
        # v = 0 forces u = 0 and g = 0
        return VSample(int(order[0]), 0.0, 1.0, 0.0)

    prefixes = _Prefixes(inst, order, ledger, summary.full_value)
    cum_u = np.concatenate([[0.0], np.cumsum(summary.u[order])])

    def mass(i: int) -> float:
        return 2.0 * cum_u[i] - prefixes.value(i)

    r = rng.uniform() * total
    lo, hi = 0, n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mass(mid) > r:
            hi = mid
        else:
            lo = mid

    j = int(order[hi - 1])
    g_j = prefixes.value(hi) - prefixes.value(lo)
    if g_j > summary.u[j] + TOLERANCE * max(1.0, abs(summary.u[j])):
        raise InvariantError(f"Subgradient coordinate {j} exceeds its singleton value; f is not submodular")
    v_j = 2.0 * summary.u[j] - g_j
    return VSample(j, g_j * total / v_j, v_j / total, g_j)


def submodular_ftrl(inst: SubmodularInstance, k: int, phi: float, delta: float, rng: RngStream,
                    ledger: Optional[QueryLedger] = None, profile: Optional[ConstantProfile] = None,
                    summary: Optional[MarginalSummary] = None) -> FTRLRun:
    """FTRL over S_k on vSampling estimates; returns the M permutations it visited."""
    if delta <= 0:
        raise ConfigError(f"Certificate accuracy delta must be positive, got {delta}")
    if phi < 0:
        raise ConfigError(f"Lower bound phi must be nonnegative, got {phi}")
    profile = profile or get_profile()
    summary = summary or marginal_summary(inst, ledger)
    n = inst.n

    u_inf = 2.0 * k * summary.linf + phi
    u_one = 2.0 * summary.l1 + phi
    if u_inf <= TOLERANCE:
        return FTRLRun(CertificateBundle.uniform([np.arange(n)]), 0, 0.0, u_inf, u_one)

    iterations = profile.cap(profile.c_M * u_inf * u_one * log_n(n) / delta ** 2, profile.max_ftrl_iterations)
    # a capped M must not inflate the step: delta / (U_inf U_1) keeps eta * |h| <= delta / U_inf
    eta = min(math.sqrt(k * log_n(n) / (iterations * u_inf * u_one)), delta / (u_inf * u_one))

    cumulative = np.zeros(n, dtype=np.longdouble)
    permutations: List[np.ndarray] = []
    for t in range(iterations):
        order = implied_permutation(cumulative)
        permutations.append(order)
        sample = v_sampling(inst, order, rng, ledger, summary)
        if eta * abs(sample.value) >= STEP_GUARD:
            raise StepSizeError(f"Step eta * |h| = {eta * abs(sample.value):.3g} reached {STEP_GUARD}", iteration=t)
        cumulative[sample.coordinate] += sample.value

    logger.debug("SubmodularFTRL: phi=%.4g delta=%.4g M=%d eta=%.4g", phi, delta, iterations, eta)
    return FTRLRun(CertificateBundle.uniform(permutations), iterations, eta, u_inf, u_one)


def stoch_dual_certificate(inst: SubmodularInstance, k: int, phi: float, delta: float, rng: RngStream,
                           ledger: Optional[QueryLedger] = None, profile: Optional[ConstantProfile] = None,
                           summary: Optional[MarginalSummary] = None) -> CertificateBundle:
    """Uniform bundle over N independent SubmodularFTRL runs at accuracy delta / 2."""
    if not 0 < delta <= phi:
        raise ConfigError(f"Need 0 < delta <= phi, got delta={delta}, phi={phi}")
    profile = profile or get_profile()
    ledger = ledger if ledger is not None else QueryLedger()
    summary = summary or marginal_summary(inst, ledger)

    repetitions = profile.cap(profile.c_N * k ** 5 * phi * summary.linf * log_n(inst.n) / delta ** 2,
                              profile.max_repetitions)

    def repetition(rep: int):
        def job(child: QueryLedger) -> CertificateBundle:
            return submodular_ftrl(inst, k, phi, delta / 2.0, rng.child(f"ftrl/{rep}"), child, profile, summary).bundle
        return job

    results = run_jobs({rep: repetition(rep) for rep in range(repetitions)}, ledger, profile.max_workers, "ftrl")
    bundle = CertificateBundle.concat([results[rep] for rep in range(repetitions)])
    logger.debug("Stochastic certificate from %d repetitions, %d permutations", repetitions, len(bundle))
    return bundle


def certificate_sample_estimate(inst: SubmodularInstance, bundle: CertificateBundle, samples: int,
                                rng: RngStream, ledger: Optional[QueryLedger] = None,
                                summary: Optional[MarginalSummary] = None) -> np.ndarray:
    """Unbiased estimate of the certificate vector from samples vSampling draws."""
    if samples < 1:
        raise ConfigError(f"Need at least one sample, got {samples}")
    summary = summary or marginal_summary(inst, ledger)
    z = np.zeros(inst.n)
    for _ in range(samples):
        t = _draw_index(bundle, rng)
        sample = v_sampling(inst, bundle.permutations[t], rng, ledger, summary)
        z[sample.coordinate] += sample.value
    return z / samples


def dim_reduction_sequential(inst: SubmodularInstance, k: int, rng: RngStream,
                             ledger: Optional[QueryLedger] = None, profile: Optional[ConstantProfile] = None,
                             summary: Optional[MarginalSummary] = None) -> Subset:
    """Elements in every minimizer of f (with high probability); empty certifies
    f* > -||u||_inf / (divisor * k)."""
    profile = profile or get_profile()
    ledger = ledger if ledger is not None else QueryLedger()
    summary = summary or marginal_summary(inst, ledger)

    negative = summary.u < -TOLERANCE
    if negative.any():
        return Subset.from_indicator(negative)
    if summary.linf <= TOLERANCE:
        return Subset(inst.n)

    schedule = phi_schedule(summary, profile.sequential_divisor * k)
    samples = profile.cap(profile.c_z * k ** 4 * (summary.l1 / summary.linf) * log_n(inst.n), profile.max_samples)
    for i, phi in enumerate(schedule):
        with ledger.phase("dim_reduction") as child:
            delta = phi / (8 * k)
            bundle = stoch_dual_certificate(inst, k, phi, delta, rng.child(f"dim_reduction/{i}"), child,
                                            profile, summary)
            z = certificate_sample_estimate(inst, bundle, samples, rng.child(f"estimate/{i}"), child, summary)
        found = z <= -3.0 * phi / (8 * k)
        if found.any():
            logger.debug("Sequential dimensionality reduction at phi=%.4g: %s", phi, np.flatnonzero(found).tolist())
            return Subset.from_indicator(found)
    return Subset(inst.n)


def _negative_mass_draw(inst: SubmodularInstance, order: np.ndarray, closure: np.ndarray, f_closure: float,
                        u_closure: float, rng: RngStream, ledger: Optional[QueryLedger],
                        summary: MarginalSummary) -> Tuple[Optional[int], float]:
    """Draw q with probability Delta_q / ||Delta||_1 for Delta = g_pi - g_{pi <- P};
    returns (q, ||Delta||_1 / B) with B = 2 u(P) - g_pi(P)."""
    n = order.shape[0]
    in_closure = np.zeros(n, dtype=bool)
    in_closure[closure] = True
    prefixes = _Prefixes(inst, order, ledger, summary.full_value)
    pos = prefixes.pos

    prefixes.fetch([int(pos[q]) for q in closure] + [int(pos[q]) + 1 for q in closure])
    g_closure = {int(q): prefixes.value(pos[q] + 1) - prefixes.value(pos[q]) for q in closure}
    g_total = sum(g_closure.values())
    mass = f_closure - g_total
    bound = 2.0 * u_closure - g_total
    if bound <= 0:
        raise InvariantError(f"Sampling bound for closure {sorted(g_closure)} is {bound:.3g}")
    if mass <= TOLERANCE * max(1.0, abs(f_closure)):
        return None, 0.0

    unions: Dict[int, float] = {0: f_closure, n: summary.full_value}

    def cumulative(i: int) -> float:
        rows, slots = [], []
        if i not in prefixes.cache:
            rows.append(prefixes.row(i))
            slots.append("prefix")
        if i not in unions:
            rows.append(prefixes.row(i) | in_closure)
            slots.append("union")
        if rows:
            values = evaluate_masks(inst, np.array(rows), ledger)
            for slot, value in zip(slots, values.tolist()):
                if slot == "prefix":
                    prefixes.cache[i] = value
                else:
                    unions[i] = value
        inside = sum(g for q, g in g_closure.items() if pos[q] < i)
        return prefixes.cache[i] - inside - unions[i] + f_closure

    r = rng.uniform() * mass
    lo, hi = 0, n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if cumulative(mid) > r:
            hi = mid
        else:
            lo = mid
    q = int(order[hi - 1])
    if in_closure[q]:
        logger.debug("Negative-mass draw landed inside the closure at %d; dropping it", q)
        return None, 0.0
    return q, mass / bound


def negative_mass_estimate(inst: SubmodularInstance, bundle: CertificateBundle, draws: Sequence[int],
                           closure: np.ndarray, z_tilde: float, rng: RngStream,
                           ledger: Optional[QueryLedger] = None,
                           summary: Optional[MarginalSummary] = None) -> np.ndarray:
    """Estimate of sum_t w_t Delta(pi_t, P) restricted to V - P for P = closure,
    from the permutations indexed by draws (sampled proportionally to B_t)."""
    if not draws:
        raise ConfigError("Negative mass estimate needs at least one draw")
    summary = summary or marginal_summary(inst, ledger)
    closure = np.asarray(closure, dtype=np.int64)
    mask = np.zeros(inst.n, dtype=bool)
    mask[closure] = True
    f_closure = evaluate(inst, mask, ledger)
    u_closure = float(summary.u[closure].sum())

    estimate = np.zeros(inst.n)
    for t in draws:
        q, weight = _negative_mass_draw(inst, bundle.permutations[t], closure, f_closure, u_closure,
                                        rng, ledger, summary)
        if q is not None:
            estimate[q] += weight
    return z_tilde * estimate / len(draws)


def _arc_targets(delta_tilde: np.ndarray, closure: np.ndarray, k: int) -> Set[int]:
    delta_tilde = delta_tilde.copy()
    delta_tilde[closure] = 0.0
    mass = float(np.abs(delta_tilde).sum())
    if mass <= 0:
        return set()
    heavy = (delta_tilde >= 3.0 * mass / (4 * k)) & (delta_tilde > 0)
    return set(np.flatnonzero(heavy).tolist())


def arc_finding_sequential(handle: SubmodularInstance, k: int, bundle: CertificateBundle, scale: float,
                           rng: RngStream, ledger: Optional[QueryLedger] = None,
                           profile: Optional[ConstantProfile] = None,
                           summary: Optional[MarginalSummary] = None) -> Dict[int, Set[int]]:
    """Arc targets S_p for every element with u_p >= scale / 2, in the handle's local ids.

    bundle must be a certificate for the handle. An empty S_p means p lies in no
    k-sparse minimizer, with high probability.
    """
    profile = profile or get_profile()
    ledger = ledger if ledger is not None else QueryLedger()
    summary = summary or marginal_summary(handle, ledger)
    active = np.flatnonzero(summary.u >= scale / 2.0).tolist()
    if not active:
        return {}

    n = handle.n
    closures = {p: handle.down_of(p) if isinstance(handle, ExtensionHandle) else np.array([p]) for p in active}
    covering: Dict[int, List[int]] = {}
    for p, closure in closures.items():
        for a in closure.tolist():
            covering.setdefault(a, []).append(p)

    draws = profile.cap(profile.c_A * k ** 4 * log_n(n) * summary.l1 / summary.linf, profile.max_samples)
    wanted = profile.cap(profile.c_P * k ** 4 * log_n(n), profile.max_samples)
    counts = {p: 0 for p in active}
    kept: Dict[int, List[int]] = {p: [] for p in active}

    sampler = rng.child("arc_sampling")
    with ledger.phase("arc_sampling") as child:
        for _ in range(draws):
            t = _draw_index(bundle, sampler)
            a = v_sampling(handle, bundle.permutations[t], sampler, child, summary).coordinate
            for p in covering.get(a, ()):
                counts[p] += 1
                if len(kept[p]) < wanted:
                    kept[p].append(t)

    arcs: Dict[int, Set[int]] = {}
    total = summary.sampling_mass

    def element_job(p: int):
        def job(child: QueryLedger) -> Set[int]:
            z_tilde = counts[p] / draws * total
            delta_tilde = negative_mass_estimate(handle, bundle, kept[p], closures[p], z_tilde,
                                                 rng.child(f"negative_mass/{p}"), child, summary)
            return _arc_targets(delta_tilde, closures[p], k)
        return job

    jobs = {}
    for p in active:
        if len(kept[p]) < wanted:
            logger.warning("Element %d drew %d of %d samples; reporting it for discard", p, len(kept[p]), wanted)
            arcs[p] = set()
        else:
            jobs[p] = element_job(p)

    arcs.update(run_jobs(jobs, ledger, profile.max_workers, "arc_finding"))
    return arcs
