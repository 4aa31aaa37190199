import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from unexpand.fixtures import chain, complete_bipartite, k21, matching
from unexpand.graphs import BipartiteGraph, check_counts, edge_vertex_incidence
from unexpand.spectral import circulant, complete_graph
from unexpand.verify import (ExpansionParams, check_combinatorial, check_fact1, check_un,
                             check_un_fraction, expansion_profile, find_light_check,
                             lemma_comb_size_check, lemma_fraction_size_check,
                             lemma_spectral_size_check, recheck, sample_subsets, scan_subsets)
from unexpand.util import make_rng, max_eligible_size

P = ExpansionParams


def test_eligible_size_is_strict():
    assert max_eligible_size(1, 3) == 2
    assert max_eligible_size(Fraction(1, 2), 6) == 2
    assert max_eligible_size(Fraction(101, 100), 3) == 3
    assert max_eligible_size(0.5, 5) == 2


def test_params_reject_out_of_range():
    for bad in (dict(delta=0), dict(delta=1, alpha=0), dict(delta=1, alpha=1.5),
                dict(delta=1, epsilon=1)):
        with pytest.raises(ValueError):
            P(**bad)


def test_comb_chain_certified():
    v = check_combinatorial(chain(), P(1, Fraction(1, 2)))
    assert v.certified and v.enumerated == 6 and v.ref_degree == 2 and v.irregular


def test_comb_matching_certified():
    assert check_combinatorial(matching(4), P(1, 1)).certified


def test_comb_k21_refuted():
    v = check_combinatorial(k21(), P(1.01, 1))
    assert v.refuted and v.witness == (0, 1)


def test_comb_k21_strict_delta_one_only_singletons():
    assert check_combinatorial(k21(), P(1, 1)).certified


def test_un_chain():
    assert check_un(chain(), 1).certified
    v = check_un(chain(), 1.01)
    assert v.refuted and v.witness == (0, 1, 2)


def test_un_singletons_only():
    assert check_un(complete_bipartite(4, 3), Fraction(1, 4)).certified


def test_un_fraction_chain_refuted():
    v = check_un_fraction(chain(), P(1, 0.5))
    assert v.refuted and v.witness == (0, 1)
    assert (v.witness_value, v.witness_required) == (1, 2)


def test_un_fraction_chain_quarter_certified():
    assert check_un_fraction(chain(), P(1, 0.25)).certified


def test_un_fraction_singletons_alpha_one():
    B = complete_bipartite(3, 3)
    assert check_un_fraction(B, P(Fraction(1, 3), 1)).certified


def test_vacuous_when_nothing_eligible():
    v = check_un(chain(), Fraction(1, 10))
    assert v.certified and v.vacuous


def test_recheck_confirms_witness():
    v = check_un_fraction(chain(), P(1, 0.5))
    assert recheck(chain(), v)


def test_fact1_matching():
    rep = check_fact1(matching(3), 1, 0)
    assert rep.premise.certified and rep.conclusion.certified and rep.holds


def test_fact1_vacuous_when_premise_fails():
    rep = check_fact1(k21(), 1.01, 0)
    assert rep.premise.refuted and rep.holds


def test_fact1_rejects_large_epsilon():
    with pytest.raises(ValueError):
        check_fact1(matching(3), 1, Fraction(1, 2))


def test_find_light_check():
    assert find_light_check(chain(), {0}, 2) == 0
    assert find_light_check(chain(), {0, 1, 2}, 2) is None
    assert find_light_check(chain(), {0, 1}, 1) is None


def test_sampling_is_tested_and_seeded():
    B = complete_bipartite(12, 2)
    kw = dict(budget=10, samples_per_class=20, seed=5)
    a = check_un(B, Fraction(1, 3), **kw)
    b = check_un(B, Fraction(1, 3), **kw)
    assert a == b
    assert a.status == "refuted"


def test_sampled_status_is_tested():
    v = check_un(matching(14), 1, budget=50, samples_per_class=30, seed=1)
    assert v.status == "tested" and v.sampled > 0


def test_exhaustive_max_size_forces_sampling():
    v = check_un(matching(8), 1, exhaustive_max_size=2, samples_per_class=10)
    assert v.status == "tested" and v.max_size_exhausted == 2


def test_workers_do_not_change_verdict():
    B = edge_vertex_incidence(complete_graph(5))
    vs = [check_combinatorial(B, P(Fraction(1, 2), Fraction(3, 4)), workers=w) for w in (1, 3)]
    assert vs[0] == vs[1]


def test_sample_subsets_distinct_and_sorted():
    rows = sample_subsets(make_rng(0, "t"), 10, 3, 50)
    assert len({tuple(r) for r in rows}) == len(rows)
    assert all(list(r) == sorted(r) for r in rows)


def test_profile_chain():
    prof = expansion_profile(chain(), 3)
    assert [p["min_unique"] for p in prof] == [1, 1, 0]


def _brute_un_fraction(B, delta, alpha, d):
    kmax = max_eligible_size(delta, B.n_left)
    for k in range(1, kmax + 1):
        for S in itertools.combinations(range(B.n_left), k):
            c = check_counts(B, S)
            if (c == 1).sum() < np.ceil(float(Fraction(alpha) * d * k) - 1e-12):
                return S
    return None


@st.composite
def left_regular(draw):
    nl = draw(st.integers(1, 7))
    nr = draw(st.integers(1, 6))
    d = draw(st.integers(1, nr))
    pairs = []
    for u in range(nl):
        for v in draw(st.sets(st.integers(0, nr - 1), min_size=d, max_size=d)):
            pairs.append((u, v))
    return BipartiteGraph.from_pairs(nl, nr, pairs)


@settings(max_examples=60, deadline=None)
@given(left_regular(), st.sampled_from([Fraction(1, 3), Fraction(1, 2), Fraction(1)]),
       st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(1)]))
def test_un_fraction_matches_brute_force(B, delta, alpha):
    v = check_un_fraction(B, P(delta, alpha))
    expect = _brute_un_fraction(B, delta, alpha, B.d_left)
    assert v.witness == expect
    assert v.refuted == (expect is not None)


@settings(max_examples=40, deadline=None)
@given(left_regular(), st.sampled_from([Fraction(1, 2), Fraction(1)]))
def test_un_fraction_implies_un(B, delta):
    if check_un_fraction(B, P(delta, Fraction(1, 100))).certified:
        assert check_un(B, delta).certified


def test_scan_respects_stop():
    B = complete_bipartite(4, 1)
    res = scan_subsets(B, 3, lambda c, k: np.ones(c.shape[0], bool), budget=100,
                       exhaustive_max_size=None, samples_per_class=0, seed=0,
                       label="t", stop_at_first=True)
    assert res.witness == (0,)


# size lemmas

def test_spectral_size_k4():
    rep = lemma_spectral_size_check(complete_graph(4), Fraction(2, 3), lam=1.0)
    assert rep.ok and rep.checked == 63
    assert rep.bound == pytest.approx(4 / 3)


def test_fraction_size_gamma_one_reduces():
    G = complete_graph(4)
    a = lemma_fraction_size_check(G, Fraction(2, 3), 1, lam=1.0)
    b = lemma_spectral_size_check(G, Fraction(2, 3), lam=1.0)
    assert (a.checked, a.hypothesis_holds, a.violations) == (b.checked, b.hypothesis_holds,
                                                            b.violations)


def test_fraction_size_k4_half():
    rep = lemma_fraction_size_check(complete_graph(4), Fraction(2, 3), Fraction(1, 2), lam=1.0)
    assert rep.bound == pytest.approx(0) and rep.ok


def test_fraction_size_c6():
    rep = lemma_fraction_size_check(circulant(6, [1, 5]), 1, Fraction(1, 2), lam=1.0)
    assert rep.ok and rep.hypothesis_holds > 0


def test_size_lemma_detects_false_lambda():
    rep = lemma_spectral_size_check(complete_graph(4), 1, lam=-3.0)
    assert not rep.ok


def test_edge_guard():
    with pytest.raises(ValueError):
        lemma_spectral_size_check(complete_graph(7), Fraction(1, 2))


def test_comb_size_lemma_on_incidence():
    B = edge_vertex_incidence(complete_graph(4))
    rep = lemma_comb_size_check(B, Fraction(1, 2), Fraction(3, 4))
    assert rep.ok


def test_comb_size_lemma_needs_certificate():
    B = edge_vertex_incidence(complete_graph(4))
    with pytest.raises(ValueError):
        lemma_comb_size_check(B, 1, 1)
