from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from unexpand.fixtures import chain, matching
from unexpand.graphs import GraphError
from unexpand.inner import (InnerSearchSpec, InsufficientBudget, SearchExhausted, certify_inner,
                            random_left_regular, search_inner)
from unexpand.util import make_rng
from unexpand.verify import check_fact1


def test_singletons_only_succeeds_first_try():
    res = search_inner(InnerSearchSpec(5, 2, 6, Fraction(1, 5)))
    assert res.attempt == 1 and res.verdict.certified


def test_matching_certifies():
    res = search_inner(InnerSearchSpec(3, 1, 3, 1, alpha=1, max_attempts=200))
    assert res.verdict.certified
    assert sorted(res.graph.right_degrees.tolist()) == [1, 1, 1]


def test_two_right_vertices_exhaust():
    spec = InnerSearchSpec(3, 2, 2, Fraction(3, 4), max_attempts=25)
    with pytest.raises(SearchExhausted) as info:
        search_inner(spec)
    assert info.value.attempts == 25
    assert info.value.near_miss["violated_size"] == 2


def test_certify_matching():
    assert certify_inner(matching(3), 1, 1).certified


def test_certify_rejects_irregular():
    with pytest.raises(GraphError):
        certify_inner(chain(), 1)


def test_certify_budget_is_hard():
    with pytest.raises(InsufficientBudget):
        certify_inner(matching(12), 1, budget=100)


def test_recertify_is_identical():
    spec = InnerSearchSpec(4, 2, 5, Fraction(3, 4), seed=7)
    res = search_inner(spec)
    assert certify_inner(res.graph, spec.delta) == res.verdict


def test_same_seed_same_graph_any_workers():
    spec = InnerSearchSpec(6, 2, 6, Fraction(2, 3), seed=11, max_attempts=500)
    a = search_inner(spec)
    b = search_inner(spec, workers=3)
    assert a.attempt == b.attempt and a.graph == b.graph


def test_spec_validation():
    with pytest.raises(ValueError):
        InnerSearchSpec(3, 4, 3, 1)
    with pytest.raises(ValueError):
        InnerSearchSpec(3, 1, 3, 0)
    with pytest.raises(ValueError):
        InnerSearchSpec(3, 1, 3, 1, prop="comb")


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.data())
def test_random_graphs_are_simple_and_regular(nl, nr, data):
    d = data.draw(st.integers(1, nr))
    B = random_left_regular(make_rng(data.draw(st.integers(0, 99)), "t"), nl, d, nr)
    assert B.is_simple and B.left_degrees.tolist() == [d] * nl


def test_comb_search_outputs_satisfy_fact1():
    for seed in range(4):
        spec = InnerSearchSpec(6, 3, 9, Fraction(1, 2), alpha=Fraction(2, 3), seed=seed,
                               prop="comb", max_attempts=2000)
        res = search_inner(spec)
        rep = check_fact1(res.graph, spec.delta, Fraction(1, 3))
        assert rep.premise.certified and rep.holds
