import json

import pytest

from oracle_core.brute_force import brute_force_sparse_min
from oracle_core.generators import generate_instance
from oracle_core.ledger import QueryLedger
from oracle_core.oracle import evaluate, marginal_summary
from oracle_core.rng import RngStream
from oracle_core.subsets import Subset
from solvers.meta import ParallelBackend, SequentialBackend, SolveConfig, SolveMode, make_backend, solve
from utils.errors import ConfigError


class TestSolveConfig:
    @pytest.mark.parametrize("kwargs", [
        {"mode": "parallel", "k": 0, "eps": 0.1},
        {"mode": "parallel", "k": 1, "eps": -1.0},
        {"mode": "parallel", "k": 1, "eps": 0.0},
        {"mode": "sequential_weak", "k": 1},
        {"mode": "annealing", "k": 1, "eps": 0.1},
    ])
    def test_rejects(self, kwargs):
        with pytest.raises(ConfigError):
            SolveConfig(**kwargs)

    def test_strong_mode_needs_no_eps(self):
        assert SolveConfig("sequential_strong", 2).mode is SolveMode.SEQUENTIAL_STRONG

    def test_profile_object_passes_through(self, desk):
        assert SolveConfig("parallel", 1, 0.1, desk).resolve_profile() is desk

    def test_unknown_profile(self):
        with pytest.raises(ConfigError):
            SolveConfig("parallel", 1, 0.1, "bogus").resolve_profile()

    def test_backends(self, desk):
        rng = RngStream(0)
        assert isinstance(make_backend(SolveMode.PARALLEL, desk, rng), ParallelBackend)
        assert isinstance(make_backend(SolveMode.SEQUENTIAL_WEAK, desk, rng), SequentialBackend)
        with pytest.raises(ConfigError):
            make_backend(SolveMode.BRUTE_FORCE, desk, rng)


class TestSolveParallel:
    def test_f2_discards_everything(self, f2, desk):
        report = solve(f2, SolveConfig("parallel", 1, 0.01, desk))
        assert report.minimizer == Subset(2)
        assert report.value == 0.0
        assert report.exit_reason == "exhausted"
        kinds = [event.kind for event in report.trace]
        assert kinds == ["scale", "arc_batch", "discard"]
        assert report.diagnostics["scales"] == [2.0]
        assert report.diagnostics["arc_batches"] == 1

    def test_negative_marginal_reaches_sparsity(self, modular, desk):
        report = solve(modular, SolveConfig("parallel", 1, 0.01, desk))
        assert report.minimizer == Subset(3, [2])
        assert report.value == -2.0
        assert report.exit_reason == "sparsity"
        assert report.trace[0].to_dict() == {"kind": "contraction", "iteration": 0, "elements": [2]}

    def test_zero_function_exits_on_marginals(self, zero, desk):
        report = solve(zero, SolveConfig("parallel", 2, 0.1, desk))
        assert report.exit_reason == "marginals"
        assert report.value == 0.0

    def test_ledger_phases(self, f2, desk):
        ledger = QueryLedger()
        report = solve(f2, SolveConfig("parallel", 1, 0.01, desk), ledger)
        phases = report.ledger["per_phase"]
        assert {"init", "dim_reduction", "arc_finding", "report"} <= set(phases)
        assert report.ledger["queries"] == ledger.queries > 0
        assert phases["report"] == {"queries": 1, "rounds": 1}

    @pytest.mark.parametrize("seed", range(3))
    def test_planted_reports_are_consistent(self, seed, desk):
        inst = generate_instance("planted", {"n": 8, "k": 2}, seed)
        report = solve(inst, SolveConfig("parallel", 2, 0.01, desk, seed))
        _, f_star = brute_force_sparse_min(inst, 2)
        assert report.value == pytest.approx(evaluate(inst, report.minimizer))
        assert f_star - 1e-9 <= report.value <= f_star + 0.01
        assert report.exit_reason in ("sparsity", "exhausted", "marginals")

    def test_debug_checks(self, modular, desk, monkeypatch):
        monkeypatch.setenv("SPARSE_SFM_DEBUG", "1")
        assert solve(modular, SolveConfig("parallel", 1, 0.01, desk)).value == -2.0

    @pytest.mark.slow
    def test_planted_within_eps(self, planted8, exact_profile):
        eps = 0.01
        report = solve(planted8, SolveConfig("parallel", 2, eps, exact_profile))
        _, f_star = brute_force_sparse_min(planted8, 2)
        assert report.value <= f_star + eps


class TestSolveSequential:
    @pytest.mark.parametrize("mode,eps", [("sequential_weak", 0.01), ("sequential_strong", 0.0)])
    def test_f2(self, f2, desk, mode, eps):
        report = solve(f2, SolveConfig(mode, 1, eps, desk, seed=3))
        assert report.minimizer == Subset(2)
        assert report.value == 0.0
        assert report.exit_reason == "exhausted"

    def test_same_seed_same_report(self, f2, desk):
        a = solve(f2, SolveConfig("sequential_weak", 1, 0.01, desk, seed=11))
        b = solve(f2, SolveConfig("sequential_weak", 1, 0.01, desk, seed=11))
        assert a.to_json() == b.to_json()

    @pytest.mark.slow
    def test_two_hundred_elements(self, desk):
        inst = generate_instance("planted", {"n": 200, "k": 2, "verify": False}, 0)
        report = solve(inst, SolveConfig("sequential_weak", 2, 1e-3, desk))
        assert report.exit_reason in ("sparsity", "exhausted", "marginals")
        assert report.value == pytest.approx(evaluate(inst, report.minimizer))
        assert report.ledger["per_phase"]["dim_reduction"]["queries"] > 0


PLANTED_CASES = [(6 + seed % 9, 1 + seed % 3, seed) for seed in range(20)]


def planted_case(n, k, seed):
    inst = generate_instance("planted", {"n": n, "k": k}, seed)
    _, f_star = brute_force_sparse_min(inst, k)
    return inst, f_star


def contracted_and_discarded(report):
    contracted, discarded = set(), set()
    for event in report.trace:
        if event.kind == "contraction":
            contracted.update(event.data["elements"])
        elif event.kind == "discard":
            discarded.update(event.data["elements"])
    return contracted, discarded


@pytest.mark.slow
class TestPlantedAgreement:
    """Solver output against enumeration, with the ring-family checks on after every update."""

    @pytest.fixture(autouse=True)
    def debug_checks(self, isolated_settings, monkeypatch):
        monkeypatch.setenv("SPARSE_SFM_DEBUG", "1")

    @pytest.mark.parametrize("n,k,seed", PLANTED_CASES)
    def test_parallel_within_eps(self, n, k, seed, desk):
        inst, f_star = planted_case(n, k, seed)
        eps = 1e-6 * marginal_summary(inst).linf
        report = solve(inst, SolveConfig("parallel", k, eps, desk, seed))
        assert report.value <= f_star + eps
        contracted, discarded = contracted_and_discarded(report)
        planted = set(inst.planted_minimizer.to_list())
        assert contracted <= planted
        assert not discarded & planted
        scales = report.diagnostics["scales"]
        assert all(later <= earlier for earlier, later in zip(scales, scales[1:]))

    def test_sequential_strong_is_exact(self, desk, record_property):
        exact = 0
        for n, k, seed in PLANTED_CASES:
            inst, f_star = planted_case(n, k, seed)
            report = solve(inst, SolveConfig("sequential_strong", k, profile=desk, seed=seed))
            contracted, discarded = contracted_and_discarded(report)
            planted = set(inst.planted_minimizer.to_list())
            consistent = contracted <= planted and not discarded & planted
            exact += int(report.value == pytest.approx(f_star, abs=1e-9) and consistent)
        record_property("sequential_strong_exact", exact)
        assert exact >= len(PLANTED_CASES) - 1


class TestBruteForceMode:
    def test_enumerates(self, path_cut):
        report = solve(path_cut, SolveConfig("brute_force", 2))
        assert report.minimizer == Subset(4)
        assert report.value == 0.0
        assert report.exit_reason == "enumerated"
        assert report.profile == "none"


class TestReport:
    def test_schema(self, modular, desk):
        data = solve(modular, SolveConfig("parallel", 1, 0.01, desk, seed=4)).to_dict()
        assert data["schema_version"] == 1
        assert data["n"] == 3
        assert data["mode"] == "parallel"
        assert data["profile"] == "desk"
        assert data["minimizer"] == [2]
        assert data["seed"] == 4
        assert set(data) >= {"queries", "rounds", "per_phase", "trace", "diagnostics", "exit_reason"}

    def test_json_is_sorted_and_stable(self, f2, desk):
        text = solve(f2, SolveConfig("parallel", 1, 0.01, desk)).to_json()
        data = json.loads(text)
        assert list(data) == sorted(data)
        assert text == solve(f2, SolveConfig("parallel", 1, 0.01, desk)).to_json()
