"""
Benchmark sweeps: run every (n, k, mode, seed) cell of a plan and tabulate
queries, rounds and the gap to the brute-force optimum.
"""

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from oracle_core.brute_force import brute_force_sparse_min
from oracle_core.generators import generate_instance
from oracle_core.ledger import QueryLedger
from solvers.meta import SolveConfig, SolveMode, solve
from utils.errors import ConfigError

logger = logging.getLogger("sparse_sfm")

COLUMNS = ["n", "k", "mode", "seed", "queries", "rounds", "value", "gap"]
GAP_LIMIT = 20


@dataclass
class BenchPlan:
    family: str
    n: List[int]
    k: List[int]
    modes: List[str]
    seeds: int = 1
    params: Dict[str, Any] = field(default_factory=dict)
    eps: float = 1e-3
    profile: Optional[str] = None
    max_workers: int = 1
    out: Optional[str] = None

    def __post_init__(self):
        if not self.n or not self.k or not self.modes:
            raise ConfigError("Bench plan grids for n, k and modes must be nonempty")
        if self.seeds < 1:
            raise ConfigError(f"Bench plan needs at least one seed, got {self.seeds}")
        if self.max_workers < 1:
            raise ConfigError(f"max_workers must be at least 1, got {self.max_workers}")
        for mode in self.modes:
            try:
                SolveMode(mode)
            except ValueError as e:
                raise ConfigError(f"Unknown mode in bench plan: {mode}") from e

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BenchPlan":
        if not isinstance(data, dict):
            raise ConfigError("Bench plan must be a JSON object")
        try:
            return cls(**data)
        except TypeError as e:
            raise ConfigError(f"Malformed bench plan: {e}") from e

    @classmethod
    def load(cls, path: Union[str, Path]) -> "BenchPlan":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Bench plan not found: {path}")
        try:
            return cls.from_dict(json.loads(path.read_text(encoding="utf-8")))
        except json.JSONDecodeError as e:
            raise ConfigError(f"Bench plan {path} is not valid JSON: {e}") from e

    def cells(self, base_seed: int = 0) -> List[Dict[str, Any]]:
        return [
            {"n": n, "k": k, "mode": mode, "seed": base_seed + s}
            for n, k, mode, s in product(self.n, self.k, self.modes, range(self.seeds))
        ]


def run_cell(plan: BenchPlan, cell: Dict[str, Any], profile: Optional[str] = None) -> Dict[str, Any]:
    """Generate the cell's instance, solve it on a fresh ledger and measure the gap."""
    params = {**plan.params, "n": cell["n"], "k": cell["k"]}
    inst = generate_instance(plan.family, params, cell["seed"])
    mode = SolveMode(cell["mode"])
    eps = plan.eps if mode in (SolveMode.PARALLEL, SolveMode.SEQUENTIAL_WEAK) else 0.0
    config = SolveConfig(mode, cell["k"], eps, profile or plan.profile, cell["seed"])
    report = solve(inst, config, QueryLedger())

    gap = None
    if inst.n <= GAP_LIMIT:
        _, f_star = brute_force_sparse_min(inst, cell["k"])
        gap = report.value - f_star
    return {**cell, "queries": report.ledger["queries"], "rounds": report.ledger["rounds"],
            "value": report.value, "gap": gap}


def run_plan(plan: BenchPlan, base_seed: int = 0, profile: Optional[str] = None) -> List[Dict[str, Any]]:
    """Rows in plan order; a failed cell keeps its coordinates and an error message."""
    cells = plan.cells(base_seed)
    rows: Dict[int, Dict[str, Any]] = {}

    def record(index: int, run):
        cell = cells[index]
        try:
            rows[index] = run()
        except Exception as e:
            logger.error("Bench cell %s failed: %s", cell, e)
            rows[index] = {**cell, "queries": None, "rounds": None, "value": None, "gap": None, "error": str(e)}

    with ThreadPoolExecutor(max_workers=plan.max_workers) as executor:
        future_to_index = {
            executor.submit(run_cell, plan, cell, profile): i
            for i, cell in enumerate(cells)
        }
        for future in as_completed(future_to_index):
            record(future_to_index[future], future.result)

    failed = sum(1 for row in rows.values() if "error" in row)
    logger.info("Bench finished: %d cells, %d failed", len(cells), failed)
    return [rows[i] for i in range(len(cells))]


def write_rows(rows: List[Dict[str, Any]], out: Union[str, Path, None], stream=None):
    """CSV with the fixed column order, or JSON when out ends in .json."""
    if out is not None and str(out).endswith(".json"):
        Path(out).write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return
    if out is None:
        _write_csv(rows, stream)
        return
    with open(out, "w", newline="", encoding="utf-8") as f:
        _write_csv(rows, f)


def _write_csv(rows: List[Dict[str, Any]], f):
    writer = csv.DictWriter(f, fieldnames=COLUMNS, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({column: "" if row.get(column) is None else row[column] for column in COLUMNS})
