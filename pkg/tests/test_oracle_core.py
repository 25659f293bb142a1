import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracle_core.brute_force import (brute_force_min, brute_force_sparse_min, minimal_minimizer, sparse_minimizers,
                                     value_table)
from oracle_core.generators import generate_instance
from oracle_core.instance_io import dumps_instance, instance_from_dict, load_instance, save_instance
from oracle_core.instances import CutInstance, ExplicitInstance, ModularPlusConcaveInstance
from oracle_core.ledger import QueryLedger
from oracle_core.oracle import (contract, evaluate, evaluate_batch, evaluate_masks, marginal_summary,
                                marginal_vector, validate_submodular)
from oracle_core.rng import RngStream
from oracle_core.subsets import Subset, to_indicator
from utils.errors import ConfigError, MalformedSubsetError, SizeLimitError


class TestSubsets:
    def test_members_are_sorted_and_deduplicated(self):
        s = Subset(5, [3, 1, 3])
        assert s.members == (1, 3)
        assert s.mask == 0b1010
        assert 3 in s and 2 not in s

    def test_out_of_range_member_rejected(self):
        with pytest.raises(MalformedSubsetError):
            Subset(3, [3])

    def test_indicator_length_must_match(self):
        with pytest.raises(MalformedSubsetError):
            to_indicator(np.zeros(4, dtype=bool), 3)

    def test_set_algebra(self):
        a, b = Subset(4, [0, 1]), Subset(4, [1, 2])
        assert (a | b).to_list() == [0, 1, 2]
        assert (a & b).to_list() == [1]
        assert (a - b).to_list() == [0]
        assert a.complement().to_list() == [2, 3]
        assert Subset.from_mask(4, 0b0101) == Subset(4, [0, 2])


class TestLedger:
    def test_single_query_costs_one_round(self, f2):
        ledger = QueryLedger()
        assert evaluate(f2, [0], ledger) == 1.0
        assert ledger.snapshot() == {"queries": 1, "rounds": 1}

    def test_batch_costs_one_round(self, f2):
        ledger = QueryLedger()
        values = evaluate_batch(f2, [[], [0], [1], [0, 1]], ledger)
        assert values == [0.0, 1.0, 2.0, 2.0]
        assert ledger.snapshot() == {"queries": 4, "rounds": 1}

    def test_empty_batch_is_free(self, f2):
        ledger = QueryLedger()
        assert evaluate_batch(f2, [], ledger) == []
        assert ledger.queries == 0 and ledger.rounds == 0

    def test_parallel_join_takes_max_rounds(self, f2):
        ledger = QueryLedger()
        a, b = ledger.fork("a"), ledger.fork("b")
        evaluate(f2, [0], a)
        evaluate(f2, [1], a)
        evaluate(f2, [0], b)
        ledger.join([a, b], parallel=True)
        assert ledger.snapshot() == {"queries": 3, "rounds": 2}

    def test_sequential_phase_adds_rounds(self, f2):
        ledger = QueryLedger()
        with ledger.phase("first") as child:
            evaluate(f2, [0], child)
        with ledger.phase("first") as child:
            evaluate(f2, [1], child)
        assert ledger.rounds == 2
        assert ledger.to_dict()["per_phase"]["first"] == {"queries": 2, "rounds": 2}

    def test_cache_does_not_change_counts(self, f2):
        f2.enable_cache()
        ledger = QueryLedger()
        evaluate(f2, [0], ledger)
        evaluate(f2, [0], ledger)
        assert ledger.queries == 2


class TestRng:
    def test_streams_are_reproducible(self):
        a = RngStream(5, "solve").uniforms(4)
        b = RngStream(5, "solve").uniforms(4)
        assert np.array_equal(a, b)

    def test_counter_resumes_stream(self):
        stream = RngStream(11, "x")
        draws = [stream.uniform() for _ in range(5)]
        resumed = RngStream(11, "x", counter=3)
        assert resumed.uniform() == draws[3]
        assert stream.counter == 5

    def test_children_are_independent(self):
        root = RngStream(3)
        assert root.child("a").uniform() != root.child("b").uniform()

    def test_index_in_range(self):
        stream = RngStream(0)
        assert all(0 <= stream.index(7) < 7 for _ in range(200))


class TestOracle:
    def test_marginal_summary_f2(self, f2):
        ledger = QueryLedger()
        summary = marginal_summary(f2, ledger)
        assert summary.u.tolist() == [1.0, 2.0]
        assert summary.full_value == 2.0
        assert summary.l1 == 3.0 and summary.linf == 2.0
        assert summary.sampling_mass == 4.0
        assert ledger.snapshot() == {"queries": 3, "rounds": 1}

    def test_marginal_vector_modular(self, modular):
        assert marginal_vector(modular).tolist() == [1.0, 1.0, -2.0]

    def test_contract_shifts_values(self, modular):
        ledger = QueryLedger()
        contracted = contract(modular, [2], ledger)
        assert contracted.n == 2
        assert contracted.kept.tolist() == [0, 1]
        assert evaluate(contracted, [0]) == pytest.approx(1.0)
        assert ledger.queries == 1

    def test_contract_empty_is_identity(self, f2):
        ledger = QueryLedger()
        assert contract(f2, [], ledger) is f2
        assert ledger.queries == 0

    def test_contract_everything_is_rejected_for_free(self, f2):
        ledger = QueryLedger()
        with pytest.raises(ConfigError):
            contract(f2, [0, 1], ledger)
        assert ledger.queries == 0

    def test_validate_rejects_supermodular(self):
        inst = ExplicitInstance(2, [0.0, 1.0, 1.0, 3.0], check=False)
        assert not validate_submodular(inst)

    def test_explicit_ingestion_rejects_supermodular(self):
        with pytest.raises(ConfigError):
            ExplicitInstance(2, [0.0, 1.0, 1.0, 3.0])

    def test_values_normalised_to_empty_set(self):
        inst = ExplicitInstance(1, [5.0, 3.0])
        assert evaluate(inst, []) == 0.0
        assert evaluate(inst, [0]) == -2.0

    def test_masks_and_batch_agree(self, path_cut):
        masks = np.array([[True, False, False, False], [False, True, True, False]])
        assert evaluate_masks(path_cut, masks).tolist() == [1.0, 2.0]


class TestBruteForce:
    def test_f2(self, f2):
        minimizer, value = brute_force_min(f2)
        assert minimizer == Subset(2) and value == 0.0

    def test_modular(self, modular):
        assert brute_force_min(modular) == (Subset(3, [2]), -2.0)
        assert brute_force_sparse_min(modular, 1) == (Subset(3, [2]), -2.0)

    def test_zero_minimal_minimizer_is_empty(self, zero):
        assert minimal_minimizer(zero) == Subset(4)

    def test_value_table_mask_order(self, f2):
        assert value_table(f2).tolist() == [0.0, 1.0, 2.0, 2.0]

    def test_sparse_minimizers_of_zero(self, zero):
        assert len(sparse_minimizers(zero, 1)) == 5

    def test_size_limit(self):
        with pytest.raises(SizeLimitError):
            value_table(ModularPlusConcaveInstance(np.ones(25)))


class TestGenerators:
    @pytest.mark.parametrize("kind", ["cut", "coverage", "modular_plus_concave", "explicit"])
    def test_generated_instances_are_submodular(self, kind):
        inst = generate_instance(kind, {"n": 6}, 3)
        assert inst.n == 6
        assert validate_submodular(inst)

    def test_planted_minimizer_is_recovered(self, planted8):
        assert minimal_minimizer(planted8) == planted8.planted_minimizer
        assert len(planted8.planted_minimizer) <= 2

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            generate_instance("nope", {"n": 3}, 0)

    def test_missing_parameter(self):
        with pytest.raises(ConfigError):
            generate_instance("planted", {"n": 5}, 0)

    def test_same_seed_same_instance(self):
        a = generate_instance("coverage", {"n": 5}, 9)
        b = generate_instance("coverage", {"n": 5}, 9)
        assert dumps_instance(a) == dumps_instance(b)


class TestInstanceIO:
    def test_round_trip_is_byte_stable(self, tmp_path, planted8):
        path = tmp_path / "inst.json"
        save_instance(planted8, path)
        again = load_instance(path)
        assert dumps_instance(again) == path.read_text(encoding="utf-8")
        assert again.planted_minimizer == planted8.planted_minimizer

    def test_explicit_round_trip(self, f2):
        data = json.loads(dumps_instance(f2))
        assert data["kind"] == "explicit"
        assert value_table(instance_from_dict(data)).tolist() == [0.0, 1.0, 2.0, 2.0]

    def test_malformed_description(self):
        with pytest.raises(ConfigError):
            instance_from_dict({"kind": "cut"})
        with pytest.raises(ConfigError):
            instance_from_dict({"n": 2, "kind": "mystery"})

    def test_declared_size_must_match(self):
        with pytest.raises(ConfigError):
            instance_from_dict({"n": 3, "kind": "explicit", "params": {"table": [0, 1]}})


@settings(max_examples=25, deadline=None)
@given(n=st.integers(min_value=2, max_value=6), seed=st.integers(min_value=0, max_value=10_000))
def test_random_cuts_are_submodular(n, seed):
    assert validate_submodular(generate_instance("cut", {"n": n}, seed))


@settings(max_examples=25, deadline=None)
@given(weights=st.lists(st.floats(min_value=0, max_value=5), min_size=3, max_size=3))
def test_triangle_cut_values(weights):
    inst = CutInstance(3, [[0, 1], [1, 2], [0, 2]], weights)
    assert evaluate(inst, [0]) == pytest.approx(weights[0] + weights[2])
    assert evaluate(inst, [0, 1, 2]) == 0.0
