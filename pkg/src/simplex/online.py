"""
Online learning loops over the capped simplex: mirror descent with the entropy
prox, stochastic FTRL, and multiplicative weights.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
from scipy.special import softmax

from oracle_core.rng import RngStream
from utils.errors import DomainError, StepSizeError
from .entropy import CappedSimplexPoint, ftrl_update, proximal_step

logger = logging.getLogger("sparse_sfm")

GradProvider = Callable[[np.ndarray, int], np.ndarray]
Sampler = Callable[[np.ndarray, int, RngStream], np.ndarray]
StopRule = Callable[[int, np.ndarray], bool]

STEP_GUARD = 0.5


@dataclass
class IterateTrace:
    """Iterates x_0..x_T and the gradients h_0..h_{T-1} that produced them.

    With record=False only the final iterate is kept and gradients is empty.
    """
    points: List[CappedSimplexPoint] = field(default_factory=list)
    gradients_used: List[np.ndarray] = field(default_factory=list)
    iterations: int = 0
    stopped_early: bool = False

    @property
    def last(self) -> CappedSimplexPoint:
        return self.points[-1]


@dataclass
class WeightTrace:
    log_weights: List[np.ndarray] = field(default_factory=list)
    probabilities: List[np.ndarray] = field(default_factory=list)


def _check_step(eta: float, m: int):
    if eta <= 0:
        raise DomainError(f"Step size must be positive, got {eta}")
    if m < 1:
        raise DomainError(f"Iteration count must be at least 1, got {m}")


def mirror_descent(grad_provider: GradProvider, k: int, x0: np.ndarray, eta: float, m: int,
                   stop: Optional[StopRule] = None, record: bool = True) -> IterateTrace:
    """x_{t+1} = prox_{x_t}(eta h_t) for m steps, h_t = grad_provider(x_t, t).

    stop(t, x_{t+1}) may end the run after any step.
    """
    _check_step(eta, m)
    x = CappedSimplexPoint(np.asarray(x0, dtype=float), k)
    if np.any(x.x <= 0):
        raise DomainError("Mirror descent needs an interior starting point")
    trace = IterateTrace(points=[x])

    for t in range(m):
        h = np.asarray(grad_provider(x.x, t), dtype=float)
        x = proximal_step(x.x, eta * h, k)
        trace.iterations = t + 1
        if record:
            trace.points.append(x)
            trace.gradients_used.append(h)
        else:
            trace.points[-1] = x
        if stop is not None and stop(t, x.x):
            trace.stopped_early = True
            logger.debug("Mirror descent stopped after %d of %d steps", t + 1, m)
            break
    return trace


def stochastic_ftrl(sampler: Sampler, n: int, k: int, eta: float, m: int, rng: RngStream,
                    record: bool = True) -> IterateTrace:
    """x_{t+1} = argmin_{S_k} <eta sum_{j<=t} h_j, x> + r(x) with sampled h_t.

    Each draw must satisfy eta * ||h_t||_inf < 1/2.
    """
    _check_step(eta, m)
    cumulative = np.zeros(n, dtype=np.longdouble)
    x = ftrl_update(np.zeros(n), k)
    trace = IterateTrace(points=[x])

    for t in range(m):
        h = np.asarray(sampler(x.x, t, rng), dtype=float)
        if eta * float(np.abs(h).max(initial=0.0)) >= STEP_GUARD:
            raise StepSizeError(f"Step {t}: eta * ||h||_inf = {eta * np.abs(h).max():.3g} >= 1/2", iteration=t)
        cumulative += h
        x = ftrl_update(eta * cumulative.astype(float), k)
        trace.iterations = t + 1
        if record:
            trace.points.append(x)
            trace.gradients_used.append(h)
        else:
            trace.points[-1] = x
    return trace


def multiplicative_weights(g_sequence) -> WeightTrace:
    """w_{t+1} = w_t * exp(g_t) from w_0 = 1, kept in log-space."""
    trace = WeightTrace()
    log_w = None
    for t, g in enumerate(g_sequence):
        g = np.asarray(g, dtype=float)
        if log_w is None:
            log_w = np.zeros(g.shape[0])
            trace.log_weights.append(log_w.copy())
            trace.probabilities.append(softmax(log_w))
        if np.abs(g).max(initial=0.0) > STEP_GUARD:
            raise StepSizeError(f"Step {t}: ||g||_inf = {np.abs(g).max():.3g} > 1/2", iteration=t)
        log_w = log_w + g
        trace.log_weights.append(log_w.copy())
        trace.probabilities.append(softmax(log_w))
    return trace
