import csv
import json
from pathlib import Path

import pytest

from cli.bench import COLUMNS, BenchPlan, run_plan
from cli.commands import main, parse_params
from oracle_core.generators import generate_instance
from oracle_core.instance_io import dumps_instance, load_instance, save_instance
from utils.errors import ConfigError


@pytest.fixture
def f2_path(tmp_path, f2):
    path = tmp_path / "f2.json"
    save_instance(f2, path)
    return path


def _read(path):
    return json.loads(path.read_text(encoding="utf-8"))


class TestParams:
    def test_values_are_json_when_possible(self):
        assert parse_params(["n=8", "edge_prob=0.5", "name=abc", "covers=[[0]]"]) == {
            "n": 8, "edge_prob": 0.5, "name": "abc", "covers": [[0]]}

    def test_rejects_missing_separator(self):
        with pytest.raises(ConfigError):
            parse_params(["n"])


class TestGen:
    def test_writes_instance(self, tmp_path):
        out = tmp_path / "planted.json"
        code = main(["--seed", "7", "gen", "--kind", "planted", "--param", "n=8", "--param", "k=2", "--out", str(out)])
        assert code == 0
        assert load_instance(out).n == 8
        assert _read(out)["meta"]["planted_minimizer"]

    def test_stdout_matches_generator(self, capsys):
        assert main(["--seed", "3", "gen", "--kind", "cut", "--param", "n=5"]) == 0
        expected = dumps_instance(generate_instance("cut", {"n": 5}, 3))
        assert capsys.readouterr().out == expected

    def test_unknown_kind(self):
        assert main(["gen", "--kind", "lattice", "--param", "n=4"]) == 2

    def test_missing_n(self):
        assert main(["gen", "--kind", "cut"]) == 2


class TestSolve:
    def test_parallel_report(self, tmp_path, f2_path):
        out = tmp_path / "report.json"
        code = main(["--profile", "desk", "solve", str(f2_path), "--mode", "parallel", "--k", "1", "--eps", "0.01",
                     "--out", str(out)])
        assert code == 0
        report = _read(out)
        assert report["minimizer"] == []
        assert report["value"] == 0.0
        assert report["schema_version"] == 1

    def test_parallel_needs_eps(self, f2_path):
        assert main(["solve", str(f2_path), "--mode", "parallel", "--k", "1"]) == 2

    def test_missing_instance(self, tmp_path):
        assert main(["solve", str(tmp_path / "missing.json"), "--k", "1", "--eps", "0.1"]) == 2

    def test_malformed_instance(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        assert main(["solve", str(path), "--k", "1", "--eps", "0.1"]) == 2

    def test_same_seed_same_bytes(self, tmp_path, f2_path):
        paths = [tmp_path / "a.json", tmp_path / "b.json"]
        for path in paths:
            assert main(["--seed", "5", "--profile", "desk", "solve", str(f2_path), "--mode", "sequential_weak",
                         "--k", "1", "--eps", "0.01", "--out", str(path)]) == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_bad_arguments(self):
        assert main(["solve"]) == 2
        assert main([]) == 2


class TestVerify:
    def test_report_round_trip(self, tmp_path, f2_path):
        report = tmp_path / "report.json"
        verdict = tmp_path / "verdict.json"
        main(["solve", str(f2_path), "--mode", "brute_force", "--k", "1", "--out", str(report)])
        assert main(["verify", str(f2_path), "--report", str(report), "--out", str(verdict)]) == 0
        data = _read(verdict)
        assert data["consistent"] is True
        assert data["gap"] == 0.0

    def test_tampered_report(self, tmp_path, f2_path):
        report = tmp_path / "report.json"
        report.write_text(json.dumps({"minimizer": [1], "value": 0.0, "k": 1}), encoding="utf-8")
        verdict = tmp_path / "verdict.json"
        assert main(["verify", str(f2_path), "--report", str(report), "--out", str(verdict)]) == 0
        data = _read(verdict)
        assert data["consistent"] is False
        assert data["gap"] == 2.0

    def test_certificate_vector(self, tmp_path, f2_path):
        cert = tmp_path / "y.json"
        cert.write_text(json.dumps({"y": [0.5, 1.0]}), encoding="utf-8")
        verdict = tmp_path / "verdict.json"
        assert main(["verify", str(f2_path), "--certificate", str(cert), "--k", "1", "--out", str(verdict)]) == 0
        assert _read(verdict)["valid"] is True

    def test_certificate_bundle(self, tmp_path, f2_path):
        cert = tmp_path / "bundle.json"
        cert.write_text(json.dumps({"permutations": [[0, 1]]}), encoding="utf-8")
        verdict = tmp_path / "verdict.json"
        assert main(["verify", str(f2_path), "--certificate", str(cert), "--k", "1", "--out", str(verdict)]) == 0
        assert _read(verdict)["cond2"] is True

    def test_certificate_needs_k(self, tmp_path, f2_path):
        cert = tmp_path / "y.json"
        cert.write_text(json.dumps({"y": [0.0, 0.0]}), encoding="utf-8")
        assert main(["verify", str(f2_path), "--certificate", str(cert)]) == 2

    def test_certificate_length_checked(self, tmp_path, f2_path):
        cert = tmp_path / "y.json"
        cert.write_text(json.dumps({"y": [0.0]}), encoding="utf-8")
        assert main(["verify", str(f2_path), "--certificate", str(cert), "--k", "1"]) == 2


class TestBench:
    def test_csv_rows(self, tmp_path):
        plan = tmp_path / "plan.json"
        plan.write_text(json.dumps({"family": "planted", "n": [6], "k": [1], "modes": ["parallel", "brute_force"],
                                    "eps": 0.01, "profile": "desk"}), encoding="utf-8")
        out = tmp_path / "rows.csv"
        assert main(["--seed", "2", "bench", str(plan), "--out", str(out)]) == 0
        with open(out, newline="", encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
        assert list(rows[0]) == COLUMNS
        assert [row["mode"] for row in rows] == ["parallel", "brute_force"]
        assert all(row["seed"] == "2" for row in rows)
        assert all(float(row["gap"]) == pytest.approx(0.0) for row in rows)

    def test_failed_cells_keep_coordinates(self):
        rows = run_plan(BenchPlan("lattice", [4], [1], ["brute_force"], seeds=2))
        assert [row["seed"] for row in rows] == [0, 1]
        assert all(row["queries"] is None and "error" in row for row in rows)

    def test_rejects_unknown_mode(self):
        with pytest.raises(ConfigError):
            BenchPlan("cut", [4], [1], ["annealing"])

    def test_bad_plan_file(self, tmp_path):
        plan = tmp_path / "plan.json"
        plan.write_text(json.dumps({"family": "cut", "n": []}), encoding="utf-8")
        assert main(["bench", str(plan)]) == 2


PLANS = Path(__file__).resolve().parent.parent / "bench_plans"


def mean_by_n(rows, column):
    assert not [row for row in rows if "error" in row]
    totals = {}
    for row in rows:
        totals.setdefault(row["n"], []).append(row[column])
    return {n: sum(values) / len(values) for n, values in totals.items()}


@pytest.mark.slow
class TestScaling:
    def test_parallel_rounds_grow_polylogarithmically(self, record_property):
        rounds = mean_by_n(run_plan(BenchPlan.load(PLANS / "parallel_depth.json")), "rounds")
        record_property("rounds_by_n", rounds)
        # n grows 16x from 50 to 800
        assert rounds[800] <= 3.0 * rounds[50]

    def test_sequential_queries_grow_nearly_linearly(self, record_property):
        queries = mean_by_n(run_plan(BenchPlan.load(PLANS / "sequential_queries.json")), "queries")
        record_property("queries_by_n", queries)
        # n grows 4x from 200 to 800
        assert queries[800] <= 6.0 * queries[200]
