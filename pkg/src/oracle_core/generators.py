"""
Random instance generators.

`planted` builds a coverage-plus-penalty instance whose unique minimizer is a
chosen set S* of size s <= k: S* members share one heavy item and each owns a
private item, their penalties make every strict subset of S* worse than S*,
and every other element carries a positive penalty so adding it never helps.
"""

import logging
from typing import Any, Dict, Optional

import numpy as np

from utils.errors import ConfigError, InvariantError
from .brute_force import minimal_minimizer
from .instances import (
    CoverageInstance,
    CutInstance,
    ExplicitInstance,
    ModularPlusConcaveInstance,
    SubmodularInstance,
    all_values,
)
from .oracle import validate_submodular
from .subsets import Subset

logger = logging.getLogger("sparse_sfm")

VERIFY_LIMIT = 16


def _require(params: Dict[str, Any], *names: str):
    missing = [name for name in names if name not in params]
    if missing:
        raise ConfigError(f"Missing generator parameters: {missing}")


def _positive_int(params: Dict[str, Any], name: str, minimum: int = 1) -> int:
    value = params[name]
    if int(value) != value or int(value) < minimum:
        raise ConfigError(f"Parameter {name} must be an integer >= {minimum}, got {value}")
    return int(value)


def random_cut(n: int, rng: np.random.Generator, edge_prob: float = 0.4,
               max_weight: float = 1.0) -> CutInstance:
    edges, weights = [], []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                edges.append((i, j))
                weights.append(float(rng.uniform(0.1, max_weight)))
    return CutInstance(n, edges, weights)


def random_coverage(n: int, rng: np.random.Generator, items: Optional[int] = None,
                    cover_prob: float = 0.3, penalty_scale: float = 0.0) -> CoverageInstance:
    items = items or max(2, n)
    covers = [np.flatnonzero(rng.random(items) < cover_prob).tolist() for _ in range(n)]
    item_weights = rng.uniform(0.2, 1.0, size=items)
    penalty = rng.uniform(-penalty_scale, penalty_scale, size=n) if penalty_scale else np.zeros(n)
    return CoverageInstance(covers, item_weights, penalty)


def random_modular_plus_concave(n: int, rng: np.random.Generator, modular_scale: float = 1.0,
                                concave_scale: float = 1.0) -> ModularPlusConcaveInstance:
    modular = rng.uniform(-modular_scale, modular_scale, size=n)
    concave = concave_scale * np.sqrt(np.arange(n + 1))
    return ModularPlusConcaveInstance(modular, concave)


def planted(n: int, k: int, rng: np.random.Generator, support: Optional[int] = None,
            cover_prob: float = 0.3, extra_items: Optional[int] = None) -> CoverageInstance:
    """Coverage instance whose unique minimizer has size min(support, n)."""
    s = min(support if support is not None else k, n)
    if s < 1 or s > k:
        raise ConfigError(f"Planted support must lie in 1..k, got {s} with k={k}")

    minimizer = np.sort(rng.choice(n, size=s, replace=False))
    in_minimizer = np.zeros(n, dtype=bool)
    in_minimizer[minimizer] = True

    extra_items = extra_items if extra_items is not None else n
    shared = 0
    private = 1 + np.arange(n)
    pool = 1 + n + np.arange(extra_items)
    shared_weight = float(s)
    item_weights = np.concatenate([
        [shared_weight],
        rng.uniform(0.5, 1.5, size=n),
        rng.uniform(0.2, 1.0, size=extra_items),
    ])

    covers = []
    penalty = np.zeros(n)
    for p in range(n):
        items = [int(private[p])]
        if in_minimizer[p]:
            items.append(shared)
            margin = float(rng.uniform(0.05, 0.2))
            penalty[p] = -(shared_weight / s + item_weights[private[p]] + margin)
        else:
            if rng.random() < cover_prob:
                items.append(shared)
            items.extend(int(i) for i in pool[rng.random(extra_items) < cover_prob])
            penalty[p] = float(rng.uniform(0.1, 1.0))
        covers.append(items)

    inst = CoverageInstance(covers, item_weights, penalty)
    inst.planted_minimizer = Subset(n, minimizer.tolist())
    return inst


def generate_instance(kind: str, params: Dict[str, Any], seed: int) -> SubmodularInstance:
    """Build a seeded random instance of the given kind."""
    params = dict(params or {})
    rng = np.random.default_rng(seed)
    _require(params, "n")
    n = _positive_int(params, "n")

    if kind == "cut":
        inst = random_cut(n, rng, float(params.get("edge_prob", 0.4)), float(params.get("max_weight", 1.0)))
    elif kind == "coverage":
        inst = random_coverage(n, rng, params.get("items"), float(params.get("cover_prob", 0.3)),
                               float(params.get("penalty_scale", 0.0)))
    elif kind == "modular_plus_concave":
        inst = random_modular_plus_concave(n, rng, float(params.get("modular_scale", 1.0)),
                                           float(params.get("concave_scale", 1.0)))
    elif kind == "explicit":
        if n > VERIFY_LIMIT:
            raise ConfigError(f"Explicit generation is limited to n <= {VERIFY_LIMIT}")
        source = random_coverage(n, rng, params.get("items"), float(params.get("cover_prob", 0.3)),
                                 float(params.get("penalty_scale", 0.5)))
        inst = ExplicitInstance(n, all_values(source), check=False)
    elif kind == "planted":
        _require(params, "k")
        k = _positive_int(params, "k")
        inst = planted(n, k, rng, params.get("support"), float(params.get("cover_prob", 0.3)),
                       params.get("extra_items"))
        if n <= VERIFY_LIMIT and params.get("verify", True):
            found = minimal_minimizer(inst)
            if found != inst.planted_minimizer or not validate_submodular(inst):
                raise InvariantError(f"Planted minimizer {inst.planted_minimizer} not recovered (found {found})")
            logger.debug("Planted minimizer %s verified by enumeration", found.to_list())
    else:
        raise ConfigError(f"Unknown instance kind: {kind}")

    logger.debug("Generated %s instance with n=%d (seed=%d)", kind, n, seed)
    return inst
