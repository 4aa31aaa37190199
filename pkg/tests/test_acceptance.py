"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is echoed in the terminal summary.
"""

import math
import subprocess
import sys
import time
from fractions import Fraction as F

import numpy as np
import pytest

from unexpand.codes import (distance_lb_from_un, gf2_rank, min_distance_exhaustive,
                            routed_ss2_equivalence, ss1_matrix)
from unexpand.compose import PipelineConfig, pipeline_comb, pipeline_spectral, routed_product
from unexpand.fixtures import BIPARTITE, by_name, random_biregular_pair
from unexpand.graphs import edge_vertex_incidence
from unexpand.inner import InnerSearchSpec, search_inner
from unexpand.spectral import (circulant, circulant_spectrum_analytic, eigenvalues, gabber_galil,
                               lambda_of, mixing_audit, power)
from unexpand.util import make_rng
from unexpand.verify import (ExpansionParams, check_combinatorial, check_fact1, check_un,
                             lemma_comb_size_check, lemma_fraction_size_check)

SPECTRAL_TOL = 1e-8
MIXING_TOL = 1e-9

# certified combinatorial outers: (base graph, delta, alpha)
COMB_OUTERS = [("K4", F(1, 2), F(3, 4)), ("K33", F(1, 3), F(3, 4)), ("circ8", F(1, 4), F(3, 4)),
               ("K5", F(1, 4), F(3, 4)), ("K5", F(1, 4), F(2, 3))]


def _circulant_cases(count=30, seed=2024):
    rng = make_rng(seed, "acceptance", "circulant")
    cases = []
    for i in range(count):
        n = int(rng.integers(3, 65)) if i < 15 else int(rng.integers(65, 513))
        k = int(rng.integers(1, 4))
        steps = rng.choice(np.arange(1, n // 2 + 1), size=min(k, n // 2), replace=False)
        conn = sorted({int(s) for t in steps for s in (t, n - t)})
        cases.append((n, conn))
    return cases


def test_c01_spectral_oracle(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for n, conn in _circulant_cases():
        vals, _, _ = eigenvalues(circulant(n, conn))
        ref = np.sort(circulant_spectrum_analytic(n, conn))
        worst = max(worst, float(np.abs(np.sort(vals) - ref).max()))
    dt = time.perf_counter() - t0
    ok = worst <= SPECTRAL_TOL and dt < 60
    criterion(1, ok, f"30 circulants, max |diff| {worst:.2e}, {dt:.1f}s")
    assert ok


def test_c02_mixing_lemma(criterion):
    t0 = time.perf_counter()
    rows = []
    for name in ("K4", "C6", "K33", "petersen"):
        G = by_name(name)
        lam = lambda_of(G).lam
        audit = mixing_audit(G, lam)
        rows.append((name, lam, audit.max_violation, audit.worst_pair))
    dt = time.perf_counter() - t0
    bad = [r for r in rows if r[2] > MIXING_TOL]
    ok = not bad and dt < 60
    detail = "; ".join(f"{n} lam={lam:.3g} viol={v:.3g}" for n, lam, v, _ in rows)
    if bad:
        detail += "; counterexample " + ", ".join(
            f"{n}: S={list(w[0])} T={list(w[1])}" for n, _, _, w in bad)
    criterion(2, ok, f"{detail} ({dt:.1f}s)")
    assert ok


def test_c03_power_spectrum(criterion):
    worst = 0.0
    for name in ("K4", "C6", "gg3"):
        G = by_name(name)
        base = np.sort(eigenvalues(G)[0])
        for k in range(1, 5):
            got = np.sort(eigenvalues(power(G, k))[0])
            worst = max(worst, float(np.abs(got - np.sort(base ** k)).max()))
    ok = worst <= SPECTRAL_TOL
    criterion(3, ok, f"K4, C6, gg3 with k=1..4, max |diff| {worst:.2e}")
    assert ok


def test_c04_spectral_size_lemmas(criterion):
    t0 = time.perf_counter()
    violations = checked = qualifying = 0
    for name in ("K4", "C6"):
        G = by_name(name)
        lam = lambda_of(G).lam
        for delta in (F(1, 3), F(1, 2), F(2, 3)):
            for gamma in (F(1, 2), F(1)):
                rep = lemma_fraction_size_check(G, delta, gamma, "exhaustive", lam)
                violations += rep.violations
                checked += rep.checked
                qualifying += rep.hypothesis_holds
    dt = time.perf_counter() - t0
    ok = violations == 0 and dt < 120
    criterion(4, ok, f"{checked} edge subsets, {qualifying} qualifying, "
                     f"{violations} violations ({dt:.1f}s)")
    assert ok


def _outer(name):
    return edge_vertex_incidence(by_name(name))


def test_c05_comb_size_lemmas(criterion):
    t0 = time.perf_counter()
    violations = checked = qualifying = 0
    fixtures = 0
    for name, delta, alpha in COMB_OUTERS:
        B = _outer(name)
        premise = check_combinatorial(B, ExpansionParams(delta, alpha))
        assert premise.certified and B.is_biregular
        fixtures += 1
        for gamma in (F(1, 2), F(1)):
            rep = lemma_comb_size_check(B, delta, alpha, gamma, "exhaustive", premise)
            violations += rep.violations
            checked += rep.checked
            qualifying += rep.hypothesis_holds
    dt = time.perf_counter() - t0
    ok = fixtures >= 5 and violations == 0 and dt < 120
    criterion(5, ok, f"{fixtures} certified fixtures, {checked} left subsets, "
                     f"{violations} violations ({dt:.1f}s)")
    assert ok


FACT1_SPECS = [(6, 3, 9, F(1, 2), F(1, 3)), (6, 3, 12, F(1, 2), F(1, 4)),
               (7, 3, 12, F(1, 2), F(1, 3)), (8, 3, 16, F(1, 2), F(1, 3)),
               (8, 4, 20, F(1, 2), F(1, 4)), (5, 2, 8, F(3, 5), F(1, 4))]


def test_c06_fact1(criterion):
    t0 = time.perf_counter()
    outputs = refuted = 0
    for i in range(12):
        nl, d, nr, delta, eps = FACT1_SPECS[i % len(FACT1_SPECS)]
        spec = InnerSearchSpec(nl, d, nr, delta, alpha=1 - eps, seed=i, prop="comb",
                               max_attempts=5000)
        res = search_inner(spec)
        rep = check_fact1(res.graph, delta, eps)
        assert rep.premise.certified
        outputs += 1
        refuted += int(rep.conclusion.refuted)
    dt = time.perf_counter() - t0
    ok = outputs >= 10 and refuted == 0 and dt < 120
    criterion(6, ok, f"{outputs} certified inner outputs, {refuted} refuted ({dt:.1f}s)")
    assert ok


SPECTRAL_BASES = [("K4", dict(base="complete", n=4)),
                  ("circ8", dict(base="circulant", n=8, conn=(1, 4, 7))),
                  ("gg3", dict(base="gabber_galil", m=3))]


def _spectral_runs():
    for name, base in SPECTRAL_BASES:
        d = by_name(name).degree
        for degree, right, alpha in ((1, d, F(1)), (2, 2 * d, F(1, 2))):
            yield name, PipelineConfig(**base, inner_delta=F(1), inner_alpha=alpha,
                                       inner_degree=degree, inner_right=right,
                                       gammas=(F(1, 4), F(1, 2)), exhaustive_max_size=4,
                                       samples_per_class=100_000, inner_max_attempts=5000)


def test_c07_spectral_pipeline(criterion):
    t0 = time.perf_counter()
    asserted = refuted = 0
    for name, cfg in _spectral_runs():
        H, dossier = pipeline_spectral(cfg)
        for claim in dossier.claims:
            positive = claim.delta > 0
            if claim.source != "spectral-headline":
                assert claim.asserted == positive
            if claim.asserted:
                asserted += 1
                refuted += int(claim.verdict.refuted)
    dt = time.perf_counter() - t0
    ok = asserted > 0 and refuted == 0 and dt < 600
    criterion(7, ok, f"6 pipelines, {asserted} positive claims checked, {refuted} refuted "
                     f"({dt:.1f}s)")
    assert ok


def test_c08_comb_pipeline(criterion):
    t0 = time.perf_counter()
    asserted = refuted = 0
    for name, delta, alpha in COMB_OUTERS:
        outer = _outer(name)
        premise = check_combinatorial(outer, ExpansionParams(delta, alpha))
        cfg = PipelineConfig(gamma=F(1, 2), inner_alpha=F(1, 2), inner_degree=2,
                             inner_right=2 * outer.d_right, exhaustive_max_size=4,
                             samples_per_class=100_000, inner_max_attempts=5000)
        H, dossier = pipeline_comb(outer, cfg, premise)
        assert H.d_left == outer.d_left * dossier.parameters["inner_degree"]
        for claim in dossier.claims:
            asserted += int(claim.asserted)
            refuted += int(claim.asserted and claim.verdict.refuted)
    dt = time.perf_counter() - t0
    ok = refuted == 0 and asserted >= 2 * len(COMB_OUTERS) and dt < 600
    criterion(8, ok, f"{len(COMB_OUTERS)} outers, {asserted} claims, {refuted} refuted "
                     f"({dt:.1f}s)")
    assert ok


def test_c09_product_identities(criterion):
    bad = 0
    for seed in range(50):
        outer, inner = random_biregular_pair(make_rng(seed, "acceptance", "product"))
        H = routed_product(outer, inner)
        degree_ok = H.is_left_regular and H.d_left == outer.d_left * inner.d_left
        beta_ok = F(H.n_right, H.n_left) == outer.d_left * F(inner.n_right, inner.n_left)
        bad += int(not (degree_ok and beta_ok))
    criterion(9, bad == 0, f"50 seeded pairs, {bad} identity failures")
    assert bad == 0


def test_c10_code_equivalence(criterion):
    t0 = time.perf_counter()
    pairs = [(BIPARTITE["toy_outer"](), BIPARTITE["toy_inner"]())]
    pairs += [random_biregular_pair(make_rng(seed, "acceptance", "equiv"), max_left=60)
              for seed in range(20)]
    unequal = sum(not routed_ss2_equivalence(o, i).equal for o, i in pairs)
    dt = time.perf_counter() - t0
    ok = unequal == 0 and all(o.n_left <= 60 for o, _ in pairs) and dt < 60
    criterion(10, ok, f"toy + 20 seeded pairs, {unequal} unequal ({dt:.1f}s)")
    assert ok


def _distance_fixtures():
    for name, build in BIPARTITE.items():
        yield name, build()
    for name in ("K4", "K5", "K33", "petersen", "C6"):
        yield f"incidence({name})", _outer(name)
    for seed in range(3):
        res = search_inner(InnerSearchSpec(8, 3, 8, F(1, 2), seed=seed, max_attempts=5000))
        yield f"inner(seed={seed})", res.graph


def test_c11_distance_chain(criterion):
    checked = broken = 0
    bc_distance = None
    for name, B in _distance_fixtures():
        if not B.is_simple or B.n_left - gf2_rank(ss1_matrix(B)) > 24:
            continue
        # delta = (k+1)/n makes every set of size <= k eligible; keep the largest certified k
        best = None
        for k in range(1, B.n_left + 1):
            v = check_un(B, F(k + 1, B.n_left))
            if not v.certified:
                break
            best = v
        if best is None:
            continue
        bound = distance_lb_from_un(best, B)
        dist = min_distance_exhaustive(ss1_matrix(B))
        checked += 1
        broken += int(dist < bound)
        if name == "Bc":
            bc_distance = (dist, bound)
    ok = checked > 0 and broken == 0 and bc_distance == (3, 3)
    criterion(11, ok, f"{checked} certified fixtures, {broken} below bound, "
                      f"Bc distance/bound {bc_distance}")
    assert ok


DETERMINISM_COMMANDS = [
    ["verify", "mixing", "fixture:petersen"],
    ["verify", "comb", "fixture:B0", "--delta", "1", "--alpha", "1/2"],
    ["verify", "lemma35", "fixture:C6", "--delta", "1", "--gamma", "1/2"],
    ["verify", "un", "fixture:Bc", "--delta", "1"],
    ["build", "inner", "--left", "6", "--degree", "2", "--right", "6", "--delta", "2/3",
     "--seed", "5"],
    ["build", "pipeline-spectral", "--base", "circulant", "--n", "8", "--conn", "1,4",
     "--inner-alpha", "1/2", "--inner-degree", "2", "--inner-right", "6", "--gammas", "1/4,1/2",
     "--exhaustive-max-size", "4", "--samples", "2000"],
    ["code", "equiv", "--outer", "fixture:toy_outer", "--inner", "fixture:toy_inner"],
]


def _run_cli(argv, workers):
    proc = subprocess.run([sys.executable, "-m", "unexpand.cli", *argv, "--workers", str(workers)],
                          capture_output=True, check=False)
    return proc.returncode, proc.stdout


def test_c12_determinism(criterion, tmp_path):
    differing = []
    for argv in DETERMINISM_COMMANDS:
        a = _run_cli(argv, 1)
        b = _run_cli(argv, 4)
        assert a[1], f"no output from {argv}"
        if a != b:
            differing.append(" ".join(argv[:2]))
    ok = not differing
    criterion(12, ok, f"{len(DETERMINISM_COMMANDS)} commands at --workers 1 vs 4, "
                      f"{len(differing)} differ {differing or ''}".rstrip())
    assert ok
