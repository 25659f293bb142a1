import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracle_core.generators import generate_instance
from oracle_core.ledger import QueryLedger
from oracle_core.oracle import evaluate, marginal_vector, validate_submodular
from oracle_core.subsets import Subset
from ring_family.handle import ExtensionHandle
from ring_family.maintainer import ExtensionMaintainer
from ring_family.state import RingFamilyState
from utils.errors import ConfigError, DomainError, InconsistentStateError


class TestState:
    def test_initial_state_is_sound(self):
        state = RingFamilyState.initial(4, 2)
        assert state.check_invariants() == []
        assert state.residual_k == 2
        assert state.live_ids().tolist() == [0, 1, 2, 3]

    def test_detects_overlap_and_stale_reverse(self):
        state = RingFamilyState.initial(3, 2)
        state.W[0] = state.D[0] = True
        state.reverse[1].add(2)
        problems = state.check_invariants()
        assert any("intersect" in p for p in problems)
        assert any("stale" in p for p in problems)

    def test_to_dict_lists_live_elements(self):
        data = RingFamilyState.initial(2, 1).to_dict()
        assert data["down"] == {"0": [0], "1": [1]}


class TestInitialisation:
    def test_rejects_bad_k(self, f2):
        with pytest.raises(ConfigError):
            ExtensionMaintainer(f2, 0)

    def test_negative_marginal_contracted(self, modular):
        maintainer = ExtensionMaintainer(modular, 1)
        assert maintainer.W == Subset(3, [2])
        assert maintainer.f_w == -2.0
        assert maintainer.live_ids().tolist() == [0, 1]
        assert maintainer.u_ext_live().tolist() == [1.0, 1.0]

    def test_marginals_match_singletons(self, f2):
        maintainer = ExtensionMaintainer(f2, 2)
        assert maintainer.u_ext_live().tolist() == [1.0, 2.0]
        assert maintainer.u_linf() == 2.0
        assert maintainer.check_invariants() == []


class TestArcs:
    def test_arc_changes_extension(self, f2):
        maintainer = ExtensionMaintainer(f2, 2)
        maintainer.update_arcs({0: {1}})
        assert maintainer.down(0) == {0, 1}
        assert maintainer.u_ext_live().tolist() == [0.0, 2.0]
        assert maintainer.ext_eval([0]) == 0.0
        assert maintainer.ext_eval([0, 1]) == 2.0
        assert maintainer.ext_subgrad([0, 1]).g.tolist() == [0.0, 2.0]
        assert maintainer.ext_partial(0, [0, 1]) == 0.0

    def test_closure_restrict(self, f2):
        maintainer = ExtensionMaintainer(f2, 2)
        maintainer.update_arcs({0: {1}})
        assert maintainer.closure_restrict([0]) == Subset(2)
        assert maintainer.closure_restrict([0, 1]) == Subset(2, [0, 1])

    def test_oversized_closure_discarded(self, f2):
        maintainer = ExtensionMaintainer(f2, 1)
        maintainer.update_arcs({0: {1}})
        assert maintainer.D == Subset(2, [0])
        assert maintainer.live_ids().tolist() == [1]
        with pytest.raises(DomainError):
            maintainer.closure_restrict([0])

    def test_chain_closure(self, zero):
        maintainer = ExtensionMaintainer(zero, 3)
        maintainer.update_arcs({0: {1}, 1: {2}})
        assert maintainer.down(0) == {0, 1, 2}
        assert maintainer.down(1) == {1, 2}
        maintainer.update_arcs({2: {3}})
        assert maintainer.D == Subset(4, [0])
        assert maintainer.down(1) == {1, 2, 3}
        assert maintainer.check_invariants() == []

    def test_discard_cascades_to_sources(self, zero):
        maintainer = ExtensionMaintainer(zero, 3)
        maintainer.update_arcs({0: {1}, 1: {2}})
        maintainer.update_space((), [2])
        assert maintainer.D == Subset(4, [0, 1, 2])
        assert maintainer.live_ids().tolist() == [3]
        assert maintainer.check_invariants() == []

    def test_arc_into_discarded_element(self, zero):
        maintainer = ExtensionMaintainer(zero, 2)
        maintainer.update_space((), [3])
        maintainer.update_arcs({1: {3}})
        assert maintainer.D == Subset(4, [1, 3])

    def test_contracted_source_promotes_targets(self, modular):
        maintainer = ExtensionMaintainer(modular, 2)
        maintainer.update_arcs({2: {0}})
        assert maintainer.W == Subset(3, [0, 2])
        assert maintainer.f_w == -1.0

    def test_discarded_source_ignored(self, f2):
        maintainer = ExtensionMaintainer(f2, 1)
        maintainer.update_arcs({0: {1}})
        maintainer.update_arcs({0: {1}})
        assert maintainer.ignored_arcs == 1
        assert maintainer.live_ids().tolist() == [1]


class TestUpdateSpace:
    def test_contract_discarded_rejected(self, zero):
        maintainer = ExtensionMaintainer(zero, 2)
        maintainer.update_space((), [1])
        with pytest.raises(InconsistentStateError):
            maintainer.update_space([1], ())

    def test_discard_contracted_rejected(self, modular):
        maintainer = ExtensionMaintainer(modular, 1)
        with pytest.raises(InconsistentStateError):
            maintainer.update_space((), [2])

    def test_contraction_takes_closure(self, zero):
        maintainer = ExtensionMaintainer(zero, 3)
        maintainer.update_arcs({0: {1}})
        maintainer.update_space([0], ())
        assert maintainer.W == Subset(4, [0, 1])

    def test_contraction_is_charged(self, path_cut):
        ledger = QueryLedger()
        maintainer = ExtensionMaintainer(path_cut, 2, ledger)
        before = ledger.queries
        maintainer.update_space([1], ())
        assert ledger.queries > before
        # u_ext(0) = f({0,1}) - f({1}) = -1 pulls 0 in; u_ext(2) = 0 is not negative
        assert maintainer.W == Subset(4, [0, 1])
        assert maintainer.f_w == evaluate(path_cut, [0, 1])


class TestHandle:
    def test_handle_over_live_elements(self, modular):
        handle = ExtensionMaintainer(modular, 2).handle()
        assert isinstance(handle, ExtensionHandle)
        assert handle.n == 2
        assert handle.to_global([1]).tolist() == [1]
        assert marginal_vector(handle).tolist() == [1.0, 1.0]
        with pytest.raises(DomainError):
            handle.to_local([2])

    def test_handle_is_cached_until_update(self, zero):
        maintainer = ExtensionMaintainer(zero, 2)
        first = maintainer.handle()
        assert maintainer.handle() is first
        maintainer.update_arcs({0: {1}})
        assert maintainer.handle() is not first

    def test_snapshot_is_json(self, f2):
        maintainer = ExtensionMaintainer(f2, 2)
        maintainer.update_arcs({0: {1}})
        data = json.loads(json.dumps(maintainer.snapshot()))
        assert data["down"]["0"] == [0, 1]
        assert data["f_W"] == 0.0


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=5000), k=st.integers(min_value=1, max_value=3),
       arcs=st.lists(st.tuples(st.integers(min_value=0, max_value=5), st.integers(min_value=0, max_value=5)),
                     max_size=6))
def test_arcs_keep_invariants(seed, k, arcs):
    inst = generate_instance("coverage", {"n": 6, "penalty_scale": 0.3}, seed)
    maintainer = ExtensionMaintainer(inst, k)
    batch = {}
    for p, q in arcs:
        batch.setdefault(p, set()).add(q)
    maintainer.update_arcs(batch)
    assert maintainer.check_invariants() == []
    assert np.all(maintainer.u_ext_live() >= -1e-9)
    s = maintainer.state
    assert not np.any(s.W & s.D)


def random_maintainer(seed, k, arcs):
    inst = generate_instance("coverage", {"n": 6, "penalty_scale": 0.3}, seed)
    maintainer = ExtensionMaintainer(inst, k)
    batch = {}
    for p, q in arcs:
        batch.setdefault(p, set()).add(q)
    maintainer.update_arcs(batch)
    return inst, maintainer


ARCS = st.lists(st.tuples(st.integers(min_value=0, max_value=5), st.integers(min_value=0, max_value=5)), max_size=6)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=5000), k=st.integers(min_value=1, max_value=3), arcs=ARCS,
       data=st.data())
def test_extension_bounds_the_restricted_value(seed, k, arcs, data):
    inst, maintainer = random_maintainer(seed, k, arcs)
    live = maintainer.live_ids().tolist()
    if not live:
        return
    S = data.draw(st.sets(st.sampled_from(live)))
    row = maintainer.state.W.copy()
    row[maintainer.closure_restrict(S).to_list()] = True
    assert maintainer.ext_eval(S) >= evaluate(inst, row) - maintainer.f_w - 1e-9


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=5000), k=st.integers(min_value=1, max_value=3), arcs=ARCS)
def test_handle_stays_submodular(seed, k, arcs):
    _, maintainer = random_maintainer(seed, k, arcs)
    if not maintainer.live_ids().size:
        return
    assert validate_submodular(maintainer.handle())


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=5000), k=st.integers(min_value=1, max_value=3), arcs=ARCS,
       data=st.data())
def test_marginals_never_increase(seed, k, arcs, data):
    inst = generate_instance("coverage", {"n": 6, "penalty_scale": 0.3}, seed)
    maintainer = ExtensionMaintainer(inst, k)
    s = maintainer.state

    def step(update):
        before = s.u_ext.copy()
        update()
        survivors = s.live_ids()
        assert np.all(s.u_ext[survivors] <= before[survivors] + 1e-9)

    batch = {}
    for p, q in arcs:
        batch.setdefault(p, set()).add(q)
    step(lambda: maintainer.update_arcs(batch))
    for kind in ("discard", "contract"):
        live = maintainer.live_ids().tolist()
        if not live:
            return
        p = data.draw(st.sampled_from(live))
        if kind == "discard":
            step(lambda: maintainer.update_space((), [p]))
        else:
            step(lambda: maintainer.update_space([p], ()))
