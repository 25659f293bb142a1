"""
Command-line surface: gen, solve, verify and bench.

Reports and tables go to stdout (or --out); diagnostics go to the log on stderr.
Exit codes: 0 success, 2 bad input or configuration, 3 solver invariant
failure, 1 anything else.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from lovasz.certificates import CertificateBundle, certificate_vector, verify_dual_certificate
from oracle_core.brute_force import brute_force_sparse_min
from oracle_core.generators import generate_instance
from oracle_core.instance_io import dumps_instance, load_instance
from oracle_core.ledger import QueryLedger
from oracle_core.oracle import evaluate
from oracle_core.subsets import Subset
from solvers.meta import SolveConfig, SolveMode, solve
from utils.errors import (ConfigError, DomainError, InconsistentStateError, InvariantError, MalformedSubsetError,
                          SizeLimitError, StepSizeError)
from utils.logger import setup_logging
from utils.settings import DEFAULT_PROFILES
from .bench import BenchPlan, run_plan, write_rows

logger = logging.getLogger("sparse_sfm")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_BAD_INPUT = 2
EXIT_INVARIANT = 3
REPORT_CHECK_LIMIT = 20

BAD_INPUT_ERRORS = (ConfigError, MalformedSubsetError, DomainError, SizeLimitError, json.JSONDecodeError,
                    FileNotFoundError)
INVARIANT_ERRORS = (InvariantError, InconsistentStateError, StepSizeError)


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_params(pairs: Sequence[str]) -> Dict[str, Any]:
    """key=value pairs; values are read as JSON when possible."""
    params = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ConfigError(f"Expected key=value, got {pair!r}")
        params[key] = _parse_value(value)
    return params


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text, encoding="utf-8")
        logger.info("Wrote %s", out)
    else:
        sys.stdout.write(text)


def _read_json(path: str) -> Any:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    return json.loads(path.read_text(encoding="utf-8"))


def cmd_gen(args) -> int:
    params = parse_params(args.param)
    inst = generate_instance(args.kind, params, args.seed)
    _emit(dumps_instance(inst), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    config = SolveConfig(args.mode, args.k, args.eps, args.profile, args.seed)
    report = solve(inst, config, QueryLedger())
    _emit(report.to_json() + "\n", args.out)
    return EXIT_OK


def _verify_certificate(inst, data: Dict[str, Any], delta: float, k: int) -> Dict[str, Any]:
    if "permutations" in data:
        y = certificate_vector(CertificateBundle.from_dict(data), inst)
    elif "y" in data:
        y = np.asarray(data["y"], dtype=float)
    else:
        raise ConfigError("Certificate file needs either 'permutations' or 'y'")
    if y.shape != (inst.n,):
        raise ConfigError(f"Certificate has {y.shape[0]} coordinates for n={inst.n}")
    check = verify_dual_certificate(inst, y, delta, k)
    if not check.valid:
        logger.warning("Certificate fails verification by %.3g", check.worst_violation)
    return {"mode": "certificate", "delta": delta, "k": k, **check.to_dict()}


def _verify_report(inst, data: Dict[str, Any], k: Optional[int]) -> Dict[str, Any]:
    if inst.n > REPORT_CHECK_LIMIT:
        raise SizeLimitError(f"Report verification enumerates sparse sets; n={inst.n} exceeds {REPORT_CHECK_LIMIT}")
    try:
        minimizer = Subset(inst.n, data["minimizer"])
        reported = float(data["value"])
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"Malformed report: {e}") from e
    k = k if k is not None else int(data.get("k", inst.n))
    value = evaluate(inst, minimizer)
    _, f_star = brute_force_sparse_min(inst, k)
    consistent = abs(value - reported) <= 1e-9 * max(1.0, abs(value))
    if not consistent:
        logger.warning("Reported value %.9g differs from recomputed %.9g", reported, value)
    return {"mode": "report", "k": k, "value": value, "reported_value": reported, "consistent": consistent,
            "f_star": f_star, "gap": value - f_star}


def cmd_verify(args) -> int:
    inst = load_instance(args.instance)
    if args.certificate:
        if args.k is None:
            raise ConfigError("--k is required to verify a certificate")
        verdict = _verify_certificate(inst, _read_json(args.certificate), args.delta, args.k)
    else:
        verdict = _verify_report(inst, _read_json(args.report), args.k)
    _emit(json.dumps(verdict, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    plan = BenchPlan.load(args.plan)
    rows = run_plan(plan, args.seed, args.profile)
    write_rows(rows, args.out or plan.out, sys.stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparse-sfm", description="k-sparse submodular function minimization")
    parser.add_argument("--seed", type=int, default=0, help="seed for generators and randomized solvers")
    parser.add_argument("--profile", choices=sorted(DEFAULT_PROFILES), default=None,
                        help="constant profile (default from settings, else desk)")
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--log-file", default=None, help="also log to this file")
    subparsers = parser.add_subparsers(dest="command", required=True)

    gen = subparsers.add_parser("gen", help="generate a random instance")
    gen.add_argument("--kind", required=True, help="cut, coverage, modular_plus_concave, explicit or planted")
    gen.add_argument("--param", action="append", default=[], metavar="KEY=VALUE", help="generator parameter")
    gen.add_argument("--out", default=None)
    gen.set_defaults(handler=cmd_gen)

    solve_cmd = subparsers.add_parser("solve", help="solve an instance")
    solve_cmd.add_argument("instance")
    solve_cmd.add_argument("--mode", default=SolveMode.PARALLEL.value, choices=[m.value for m in SolveMode])
    solve_cmd.add_argument("--k", type=int, required=True)
    solve_cmd.add_argument("--eps", type=float, default=0.0)
    solve_cmd.add_argument("--out", default=None)
    solve_cmd.set_defaults(handler=cmd_solve)

    verify = subparsers.add_parser("verify", help="check a certificate or a solve report")
    verify.add_argument("instance")
    source = verify.add_mutually_exclusive_group(required=True)
    source.add_argument("--certificate", default=None, help="bundle or {'y': [...]} JSON")
    source.add_argument("--report", default=None, help="solve report JSON")
    verify.add_argument("--delta", type=float, default=0.0)
    verify.add_argument("--k", type=int, default=None)
    verify.add_argument("--out", default=None)
    verify.set_defaults(handler=cmd_verify)

    bench = subparsers.add_parser("bench", help="run a benchmark plan")
    bench.add_argument("plan")
    bench.add_argument("--out", default=None, help="CSV path, or .json for JSON rows")
    bench.set_defaults(handler=cmd_bench)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_BAD_INPUT if e.code else EXIT_OK
    setup_logging(args.log_file, getattr(logging, args.log_level))

    try:
        return args.handler(args)
    except BAD_INPUT_ERRORS as e:
        logger.error("Bad input: %s", e)
        return EXIT_BAD_INPUT
    except INVARIANT_ERRORS as e:
        logger.error("Solver invariant failed: %s", e)
        return EXIT_INVARIANT
    except Exception as e:
        logger.exception("Command %s failed: %s", args.command, e)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
