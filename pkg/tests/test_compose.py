from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from unexpand.compose import (PipelineConfig, order_change_relabeling, pipeline_comb,
                              pipeline_spectral, relabel_right, routed_product)
from unexpand.fixtures import (complete_bipartite, matching, random_biregular_pair, toy_inner,
                               toy_outer)
from unexpand.graphs import BipartiteGraph, GraphError, edge_vertex_incidence
from unexpand.spectral import complete_graph
from unexpand.util import make_rng
from unexpand.verify import ExpansionParams, check_combinatorial


def test_toy_product():
    H = routed_product(toy_outer(), toy_inner())
    assert set((u, r) for u, r, _ in H.edges) == {(0, 0), (1, 1)}
    assert H.d_left == 1


def test_complete_inner_clones_right_vertices():
    outer = toy_outer()
    H = routed_product(outer, complete_bipartite(2, 3))
    assert H.d_left == 3 and H.n_right == 3
    assert all(H.matrix[:, r].tolist() == [1, 1] for r in range(3))


def test_product_rejects_size_mismatch():
    with pytest.raises(GraphError):
        routed_product(toy_outer(), matching(3))


def test_product_rejects_irregular_inner():
    inner = BipartiteGraph.from_pairs(2, 2, [(0, 0), (0, 1), (1, 1)])
    with pytest.raises(GraphError):
        routed_product(toy_outer(), inner)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_degree_and_imbalance_identities(seed):
    outer, inner = random_biregular_pair(make_rng(seed, "pair"))
    H = routed_product(outer, inner)
    assert H.is_left_regular and H.d_left == outer.d_left * inner.d_left
    assert Fraction(H.n_right, H.n_left) == outer.d_left * Fraction(inner.n_right, inner.n_left)


def test_order_change_with_automorphism():
    outer = toy_outer()
    inner = toy_inner()
    swapped = outer.with_right_order([[1, 0]])
    rho = order_change_relabeling(inner, [1, 0])
    assert rho is not None
    assert relabel_right(routed_product(outer, inner), rho) == routed_product(swapped, inner)


def test_order_change_without_automorphism():
    inner = BipartiteGraph.from_pairs(3, 2, [(0, 0), (1, 0), (2, 1)])
    assert order_change_relabeling(inner, [2, 1, 0]) is None
    outer = BipartiteGraph.from_pairs(3, 1, [(0, 0), (1, 0), (2, 0)])
    a = routed_product(outer, inner)
    b = routed_product(outer.with_right_order([[2, 1, 0]]), inner)
    assert a != b


def test_spectral_pipeline_k4():
    cfg = PipelineConfig(inner_delta=1, inner_alpha=1, inner_degree=1)
    H, d = pipeline_spectral(cfg, inner=matching(3))
    claims = {c.name.split()[0]: c for c in d.claims}
    one = claims["one-unique-neighbor"]
    assert one.delta == pytest.approx(2 / 3) and one.verdict.certified
    frac = claims["fraction"]
    assert frac.delta == pytest.approx(1 / 12) and frac.alpha == Fraction(1, 6)
    assert frac.verdict.certified
    head = claims["headline"]
    assert (head.delta, head.alpha) == (Fraction(1, 8), Fraction(1, 12))
    assert d.parameters["left_degree_claimed"] == 2 == H.d_left
    assert d.ok


def test_spectral_pipeline_reports_nonpositive_bound():
    cfg = PipelineConfig(base="circulant", n=6, conn=(1, 5), inner_delta=Fraction(1, 3),
                         inner_degree=1)
    _, d = pipeline_spectral(cfg, inner=matching(2))
    assert not d.claims[0].asserted and d.warnings


def test_spectral_pipeline_strips_loops():
    cfg = PipelineConfig(base="gabber_galil", m=3, inner_delta=Fraction(1, 8), inner_degree=1,
                         inner_max_attempts=50)
    H, d = pipeline_spectral(cfg)
    assert d.parameters["regular_case"]
    assert any("loops stripped" in w for w in d.warnings)


def _k4_comb():
    outer = edge_vertex_incidence(complete_graph(4))
    premise = check_combinatorial(outer, ExpansionParams(Fraction(1, 2), Fraction(3, 4)))
    assert premise.certified
    return outer, premise


def test_comb_pipeline_k4():
    outer, premise = _k4_comb()
    cfg = PipelineConfig(gamma=Fraction(1, 2), inner_alpha=Fraction(1, 3), inner_degree=2,
                         inner_right=4)
    H, d = pipeline_comb(outer, cfg, premise)
    assert d.parameters["inner_delta"] == "8/9"
    assert H.d_left == outer.d_left * d.parameters["inner_degree"]
    assert d.ok and all(c.verdict.certified for c in d.claims)


def test_comb_pipeline_rejects_gamma_one():
    outer, premise = _k4_comb()
    with pytest.raises(ValueError):
        pipeline_comb(outer, PipelineConfig(gamma=1), premise)


def test_comb_pipeline_needs_certificate():
    outer, premise = _k4_comb()
    other = check_combinatorial(outer, ExpansionParams(1, 1))
    with pytest.raises(ValueError):
        pipeline_comb(outer, PipelineConfig(), other)


def test_comb_pipeline_needs_large_right_degree():
    outer, premise = _k4_comb()
    with pytest.raises(ValueError):
        pipeline_comb(outer, PipelineConfig(gamma=Fraction(1, 5)), premise)


def test_comb_pipeline_reports_headline_when_epsilon_set():
    outer, premise = _k4_comb()
    cfg = PipelineConfig(gamma=Fraction(1, 2), epsilon=Fraction(1, 2), n0_inner=4,
                         inner_alpha=Fraction(1, 2), inner_degree=2, inner_right=6)
    _, d = pipeline_comb(outer, cfg, premise)
    head = d.claims[-1]
    assert head.source == "comb-headline"
    assert (head.delta, head.alpha) == (Fraction(1, 2), Fraction(3, 8))
    assert not head.asserted and head.verdict is not None
    assert d.parameters["mu_recipe"] == "1/4"
