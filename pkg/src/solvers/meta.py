"""
Driver loop for k-sparse SFM.

Contracts elements found by dimensionality reduction, otherwise fixes the
current scale of ||u_ext||_inf and runs arc finding until the scale halves.
The parallel and sequential pipelines plug in as backends; brute force is
available as a reference mode.
"""

import json
import logging
from abc import ABC, abstractmethod
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Set, Union

import numpy as np

from oracle_core.brute_force import brute_force_min, brute_force_sparse_min, minimal_minimizer
from oracle_core.instances import SubmodularInstance
from oracle_core.ledger import QueryLedger
from oracle_core.oracle import evaluate, marginal_summary
from oracle_core.rng import RngStream
from oracle_core.subsets import Subset
from ring_family.handle import ExtensionHandle
from ring_family.maintainer import ExtensionMaintainer
from utils.errors import ConfigError, InvariantError
from utils.settings import TOLERANCE, ConstantProfile, debug_checks_enabled, get_profile
from .parallel_solver import arc_finding_parallel, dim_reduction_parallel
from .sequential_solver import arc_finding_sequential, dim_reduction_sequential, stoch_dual_certificate

logger = logging.getLogger("sparse_sfm")

SCHEMA_VERSION = 1


class SolveMode(str, Enum):
    PARALLEL = "parallel"
    SEQUENTIAL_WEAK = "sequential_weak"
    SEQUENTIAL_STRONG = "sequential_strong"
    BRUTE_FORCE = "brute_force"


@dataclass
class SolveConfig:
    mode: SolveMode
    k: int
    eps: float = 0.0
    profile: Union[str, ConstantProfile, None] = None
    seed: int = 0

    def __post_init__(self):
        try:
            self.mode = SolveMode(self.mode)
        except ValueError as e:
            raise ConfigError(f"Unknown solve mode: {self.mode}") from e
        if self.k < 1:
            raise ConfigError(f"Sparsity k must be at least 1, got {self.k}")
        if self.eps < 0:
            raise ConfigError(f"Accuracy eps must be nonnegative, got {self.eps}")
        if self.mode in (SolveMode.PARALLEL, SolveMode.SEQUENTIAL_WEAK) and self.eps <= 0:
            raise ConfigError(f"Mode {self.mode.value} needs eps > 0")

    def resolve_profile(self) -> ConstantProfile:
        if isinstance(self.profile, ConstantProfile):
            return self.profile
        return get_profile(self.profile)


@dataclass
class TraceEvent:
    kind: str                 # contraction, discard, scale, arc_batch
    iteration: int
    data: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "iteration": self.iteration, **self.data}


@dataclass
class SolveReport:
    minimizer: Subset
    value: float
    config: SolveConfig
    profile: str
    exit_reason: str
    ledger: Dict[str, Any]
    trace: List[TraceEvent] = field(default_factory=list)
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "n": self.minimizer.n,
            "mode": self.config.mode.value,
            "k": self.config.k,
            "eps": self.config.eps,
            "seed": self.config.seed,
            "profile": self.profile,
            "minimizer": self.minimizer.to_list(),
            "value": self.value,
            "exit_reason": self.exit_reason,
            "queries": self.ledger["queries"],
            "rounds": self.ledger["rounds"],
            "per_phase": self.ledger.get("per_phase", {}),
            "trace": [event.to_dict() for event in self.trace],
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


class Backend(ABC):
    """Dimensionality reduction and arc finding over the current extension"""

    name = "backend"

    def __init__(self, profile: ConstantProfile, rng: RngStream):
        self.profile = profile
        self.rng = rng
        self.calls = 0

    @abstractmethod
    def dim_reduction(self, handle: ExtensionHandle, k: int, ledger: QueryLedger) -> Subset:
        ...

    @abstractmethod
    def find_arcs(self, handle: ExtensionHandle, k: int, scale: float, ledger: QueryLedger) -> Dict[int, Set[int]]:
        ...


class ParallelBackend(Backend):
    name = "parallel"

    def dim_reduction(self, handle, k, ledger):
        return dim_reduction_parallel(handle, k, ledger, self.profile)

    def find_arcs(self, handle, k, scale, ledger):
        return arc_finding_parallel(handle, k, scale, ledger, self.profile)


class SequentialBackend(Backend):
    name = "sequential"

    def dim_reduction(self, handle, k, ledger):
        self.calls += 1
        return dim_reduction_sequential(handle, k, self.rng.child(f"dim_reduction/{self.calls}"), ledger, self.profile)

    def find_arcs(self, handle, k, scale, ledger):
        self.calls += 1
        rng = self.rng.child(f"arc_finding/{self.calls}")
        summary = marginal_summary(handle, ledger)
        phi = scale / (self.profile.sequential_divisor * k)
        delta = summary.linf / (self.profile.arc_delta_divisor * k)
        bundle = stoch_dual_certificate(handle, k, phi, delta, rng.child("certificate"), ledger, self.profile, summary)
        return arc_finding_sequential(handle, k, bundle, scale, rng.child("arcs"), ledger, self.profile, summary)


def make_backend(mode: SolveMode, profile: ConstantProfile, rng: RngStream) -> Backend:
    if mode is SolveMode.PARALLEL:
        return ParallelBackend(profile, rng)
    if mode in (SolveMode.SEQUENTIAL_WEAK, SolveMode.SEQUENTIAL_STRONG):
        return SequentialBackend(profile, rng)
    raise ConfigError(f"No backend for mode {mode.value}")


@contextmanager
def _charging(maintainer: ExtensionMaintainer, ledger: QueryLedger, label: str) -> Iterator[None]:
    """Route the maintainer's queries to a labelled phase."""
    with ledger.phase(label) as child:
        maintainer.ledger = child
        try:
            yield
        finally:
            maintainer.ledger = ledger


class _Recorder:
    """Turns changes of W and D into trace events"""

    def __init__(self, maintainer: ExtensionMaintainer):
        self.maintainer = maintainer
        self.trace: List[TraceEvent] = []
        self._w = np.zeros_like(maintainer.state.W)
        self._d = np.zeros_like(maintainer.state.D)

    def add(self, kind: str, iteration: int, **data):
        self.trace.append(TraceEvent(kind, iteration, data))

    def sync(self, iteration: int):
        s = self.maintainer.state
        added_w = np.flatnonzero(s.W & ~self._w).tolist()
        added_d = np.flatnonzero(s.D & ~self._d).tolist()
        if added_w:
            logger.info("Contracted %s", added_w)
            self.add("contraction", iteration, elements=added_w)
        if added_d:
            logger.info("Discarded %s", added_d)
            self.add("discard", iteration, elements=added_d)
        self._w = s.W.copy()
        self._d = s.D.copy()
        if debug_checks_enabled():
            problems = self.maintainer.check_invariants()
            if problems:
                raise InvariantError("; ".join(problems))


def _brute_force_report(inst: SubmodularInstance, config: SolveConfig, ledger: QueryLedger) -> SolveReport:
    minimizer, value = brute_force_sparse_min(inst, config.k)
    return SolveReport(minimizer, value, config, "none", "enumerated", ledger.to_dict())


def solve(inst: SubmodularInstance, config: SolveConfig, ledger: Optional[QueryLedger] = None) -> SolveReport:
    """k-sparse minimizer of inst; eps-approximate in the weak modes, exact (whp) in strong mode."""
    ledger = ledger if ledger is not None else QueryLedger()
    if config.mode is SolveMode.BRUTE_FORCE:
        return _brute_force_report(inst, config, ledger)

    profile = config.resolve_profile()
    backend = make_backend(config.mode, profile, RngStream(config.seed, "solve"))
    k = config.k
    if config.mode is SolveMode.SEQUENTIAL_STRONG:
        threshold = TOLERANCE
    else:
        threshold = max(config.eps / inst.n, TOLERANCE)
    logger.info("Solving n=%d k=%d mode=%s eps=%.3g profile=%s", inst.n, k, config.mode.value, config.eps,
                profile.name)

    with ledger.phase("init") as child:
        maintainer = ExtensionMaintainer(inst, k, child)
    maintainer.ledger = ledger
    recorder = _Recorder(maintainer)
    recorder.sync(0)

    state = maintainer.state
    scales: List[float] = []
    dim_reductions = arc_batches = 0
    iteration = 0
    while True:
        if int(state.W.sum()) >= k:
            exit_reason = "sparsity"
            break
        if not state.live.any():
            exit_reason = "exhausted"
            break
        linf = maintainer.u_linf()
        if linf <= threshold:
            exit_reason = "marginals"
            break

        iteration += 1
        handle = maintainer.handle()
        with ledger.phase("dim_reduction") as child:
            found = backend.dim_reduction(handle, state.residual_k, child)
        dim_reductions += 1
        if len(found):
            with _charging(maintainer, ledger, "ring_family"):
                maintainer.update_space(handle.to_global(found.members), ())
            recorder.sync(iteration)
            continue

        scale = linf
        scales.append(scale)
        logger.info("Scale %.6g with %d live elements", scale, int(state.live.sum()))
        recorder.add("scale", iteration, scale=scale)
        batches = 0
        while state.live.any() and int(state.W.sum()) < k and maintainer.u_linf() > scale / 2.0:
            batches += 1
            if batches > k:
                raise InvariantError(f"Scale {scale:.6g} did not halve after {k} arc batches")
            handle = maintainer.handle()
            with ledger.phase("arc_finding") as child:
                local_arcs = backend.find_arcs(handle, state.residual_k, scale, child)
            arc_batches += 1

            discard = [int(handle.live_ids[p]) for p, targets in local_arcs.items() if not targets]
            arcs = {
                int(handle.live_ids[p]): set(handle.to_global(sorted(targets)).tolist())
                for p, targets in local_arcs.items() if targets
            }
            recorder.add("arc_batch", iteration, scale=scale, discard=sorted(discard),
                         arcs={str(p): sorted(targets) for p, targets in sorted(arcs.items())})
            with _charging(maintainer, ledger, "ring_family"):
                maintainer.update_space((), discard)
                maintainer.update_arcs({p: targets for p, targets in arcs.items() if state.live[p]})
            recorder.sync(iteration)

    if exit_reason == "marginals":
        minimizer = Subset.from_indicator(~state.D)
    else:
        minimizer = Subset.from_indicator(state.W)
    with ledger.phase("report") as child:
        value = evaluate(inst, minimizer, child)

    logger.info("Solve finished (%s): |S|=%d value=%.6g queries=%d rounds=%d", exit_reason, len(minimizer), value,
                ledger.queries, ledger.rounds)
    diagnostics = {
        "iterations": iteration,
        "dim_reductions": dim_reductions,
        "arc_batches": arc_batches,
        "scales": scales,
        "ignored_arcs": maintainer.ignored_arcs,
        "final_state": maintainer.snapshot(),
    }
    return SolveReport(minimizer, value, config, profile.name, exit_reason, ledger.to_dict(), recorder.trace,
                       diagnostics)


__all__ = [
    'Backend',
    'ParallelBackend',
    'SequentialBackend',
    'SolveConfig',
    'SolveMode',
    'SolveReport',
    'TraceEvent',
    'brute_force_min',
    'brute_force_sparse_min',
    'make_backend',
    'minimal_minimizer',
    'solve',
]
