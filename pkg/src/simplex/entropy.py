"""
Entropy geometry over the capped simplex S_k = {x in [0, 1]^n : sum(x) <= k}.

The proximal step works in log-space: log y = log x0 - h, with suffix
log-sum-exp for the unsaturated mass, so long FTRL runs never overflow.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import rel_entr, xlogy

from utils.errors import DomainError, InvariantError
from utils.settings import debug_checks_enabled

logger = logging.getLogger("sparse_sfm")

KKT_LIMIT = 1e-8
_ACCEPT = 1e-12
_TINY = np.finfo(float).tiny


def strong_convexity(k: int) -> float:
    """Modulus of the entropy on S_k with respect to the l1 norm."""
    return 1.0 / (k + 1)


@dataclass
class CappedSimplexPoint:
    x: np.ndarray
    k: int

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        if self.k < 1:
            raise DomainError(f"Capped simplex needs k >= 1, got {self.k}")
        if np.any(self.x < 0) or np.any(self.x > 1 + 1e-12):
            raise DomainError("Capped simplex point must lie in [0, 1]^n")
        if self.x.sum() > self.k + 1e-9:
            raise DomainError(f"Capped simplex point has mass {self.x.sum():.6g} > k={self.k}")

    @property
    def n(self) -> int:
        return self.x.shape[0]


def entropy(x: np.ndarray) -> float:
    """sum_i x_i log x_i with 0 log 0 = 0"""
    return float(np.sum(xlogy(x, x)))


def bregman(x: np.ndarray, y: np.ndarray) -> float:
    """V_x(y) = <y, log(y / x)> + <x - y, 1>, nonnegative."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0):
        raise DomainError("Bregman divergence needs a strictly positive center")
    # rel_entr(y, x) = y log(y/x) with 0 log 0 = 0
    return float(np.sum(rel_entr(y, x)) + np.sum(x - y))


def _log_center(x0: np.ndarray, h: np.ndarray) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float)
    h = np.asarray(h, dtype=float)
    if x0.shape != h.shape:
        raise DomainError(f"Center of shape {x0.shape} and gradient of shape {h.shape} differ")
    if np.any(x0 <= 0):
        raise DomainError("Proximal center must be strictly positive")
    return np.log(np.maximum(x0, _TINY)) - h


def proximal_step(x0: np.ndarray, h: np.ndarray, k: int, check: Optional[bool] = None) -> CappedSimplexPoint:
    """argmin over S_k of <h, z> + V_{x0}(z).

    The minimiser is z = min(1, y e^{-lambda}) for y = x0 e^{-h}; the scan over
    saturation counts i = 0..k-1 picks the smallest i consistent with the
    KKT conditions (no unsaturated y above e^lambda, no saturated one below).
    """
    if k < 1:
        raise DomainError(f"Proximal step needs k >= 1, got {k}")
    ly = _log_center(x0, h)
    n = ly.shape[0]

    if n <= k:
        z = np.exp(np.minimum(ly, 0.0))
        point = CappedSimplexPoint(z, k)
    else:
        order = np.lexsort((np.arange(n), -ly))
        ly_sorted = ly[order]
        suffix = np.logaddexp.accumulate(ly_sorted[::-1])[::-1]

        saturated, lam = None, 0.0
        for i in range(k):
            lam = max(0.0, suffix[i] - np.log(k - i))
            if ly_sorted[i] - lam <= _ACCEPT and (i == 0 or ly_sorted[i - 1] - lam >= -_ACCEPT):
                saturated = i
                break
        if saturated is None:
            raise InvariantError(f"Proximal step found no consistent saturation count (n={n}, k={k})")

        z_sorted = np.ones(n)
        z_sorted[saturated:] = np.minimum(1.0, np.exp(ly_sorted[saturated:] - lam))
        z = np.empty(n)
        z[order] = z_sorted
        z = np.minimum(z, 1.0)
        excess = z.sum() - k
        if excess > 0:
            # rounding in exp can leave the mass a few ulps above k
            z[order[saturated:]] *= 1.0 - excess / max(z_sorted[saturated:].sum(), _TINY)
        point = CappedSimplexPoint(z, k)

    if check or (check is None and debug_checks_enabled()):
        _check_prox(ly, point.x, k)
    return point


def kkt_residual(x0: np.ndarray, h: np.ndarray, k: int, z: np.ndarray) -> float:
    """Largest violation of feasibility, stationarity and complementary slackness.

    Stationarity is z_i = y_i exp(-mu_i - lambda) with mu_i >= 0 only where z_i = 1.
    lambda is recovered from the unsaturated coordinates.
    """
    ly = _log_center(x0, h)
    z = np.asarray(z, dtype=float)
    residual = max(0.0, float(-z.min()), float(z.max()) - 1.0, float(z.sum()) - k)

    unsaturated = z < 1.0 - 1e-12
    # coordinates that underflowed to 0 carry no usable log
    resolvable = unsaturated & (z > 1e-250)
    lam = 0.0
    if resolvable.any() and z.sum() >= k - 1e-9:
        lam = max(0.0, float(np.mean(ly[resolvable] - np.log(z[resolvable]))))

    if resolvable.any():
        gap = np.abs(np.log(z[resolvable]) - (ly[resolvable] - lam))
        residual = max(residual, float(gap.max()))
    if (~unsaturated).any():
        # saturated coordinates need mu_i = log y_i - lambda >= 0
        residual = max(residual, float(np.max(lam - ly[~unsaturated])))
    residual = max(residual, lam * abs(float(z.sum()) - k))
    return residual


def _check_prox(ly: np.ndarray, z: np.ndarray, k: int):
    residual = kkt_residual(np.ones_like(ly), -ly, k, z)
    if residual > KKT_LIMIT:
        raise InvariantError(f"Proximal step KKT residual {residual:.3g} exceeds {KKT_LIMIT}")
    order = np.lexsort((np.arange(ly.shape[0]), -ly))
    if np.any(np.diff(z[order]) > 1e-12):
        raise InvariantError("Proximal step does not preserve the order of x0 * exp(-h)")
    logger.debug("Proximal step verified: KKT residual %.3g", residual)


def ftrl_update(h_cumulative: np.ndarray, k: int, check: Optional[bool] = None) -> CappedSimplexPoint:
    """argmin over S_k of <h, x> + r(x) for the entropy r."""
    h_cumulative = np.asarray(h_cumulative, dtype=float)
    n = h_cumulative.shape[0]
    x0 = np.full(n, min(k, n) / n)
    return proximal_step(x0, h_cumulative + np.log(x0) + 1.0, k, check)


def implied_permutation(h_cumulative: np.ndarray) -> np.ndarray:
    """Order of the FTRL iterate for cumulative gradient h, without computing it.

    Nonincreasing -h with ties by ascending index; independent of k.
    """
    h_cumulative = np.asarray(h_cumulative)
    return np.lexsort((np.arange(h_cumulative.shape[0]), h_cumulative))
