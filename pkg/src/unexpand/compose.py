"""Routed product and the spectral-outer / combinatorial-outer pipelines."""

from __future__ import annotations

import itertools
import logging
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .graphs import BipartiteGraph, GraphError, RegularGraph, edge_vertex_incidence, strip_loops
from .inner import InnerResult, InnerSearchSpec, certify_inner, search_inner
from .spectral import circulant, complete_graph, gabber_galil, lambda_of, power
from .util import as_fraction, fmt_num
from .verify import (DEFAULT_BUDGET, DEFAULT_SAMPLES, ExpansionParams, ExpansionVerdict,
                     check_un, check_un_fraction, graph_digest)

log = logging.getLogger(__name__)


def routed_product(outer: BipartiteGraph, inner: BipartiteGraph,
                   allow_irregular: bool = False) -> BipartiteGraph:
    """Route slot i of each outer right vertex v through inner left vertex i.

    Right vertex (v, w) of the product has index ``v * inner.n_right + w``.
    With ``allow_irregular`` the outer right degrees may fall short of
    ``inner.n_left``; the missing slots are simply unused.
    """
    if not inner.is_left_regular:
        raise GraphError("inner graph must be left-regular")
    if allow_irregular:
        if not outer.is_left_regular:
            raise GraphError("outer graph must be left-regular")
        if outer.n_right and int(outer.right_degrees.max()) > inner.n_left:
            raise GraphError(
                f"outer right degree {int(outer.right_degrees.max())} exceeds inner "
                f"left size {inner.n_left}")
    else:
        if not outer.is_biregular:
            raise GraphError("outer graph must be biregular")
        if inner.n_left != outer.d_right:
            raise GraphError(
                f"inner left size {inner.n_left} != outer right degree {outer.d_right}")
    out_of = [[] for _ in range(inner.n_left)]
    for i, w, m in inner.edges:
        out_of[i].append((w, m))
    nr = inner.n_right
    edges = {}
    for v, slots in enumerate(outer.right_order):
        for i, u in enumerate(slots):
            for w, m in out_of[i]:
                key = (u, v * nr + w)
                edges[key] = edges.get(key, 0) + m
    return BipartiteGraph(outer.n_left, outer.n_right * nr,
                          tuple((u, r, m) for (u, r), m in edges.items()))


def order_change_relabeling(inner: BipartiteGraph, perm) -> list[int] | None:
    """Right relabeling rho with (perm[i], rho[w]) in E' iff (i, w) in E'.

    Exists exactly when the slot permutation lifts to an automorphism of the
    inner graph; found by brute force (inner graphs are tiny).
    """
    M = inner.matrix
    target = M[list(perm)]
    cols = {}
    for w in range(inner.n_right):
        cols.setdefault(M[:, w].tobytes(), []).append(w)
    rho = [None] * inner.n_right
    used: dict[bytes, int] = {}
    for w in range(inner.n_right):
        key = target[:, w].tobytes()
        pool = cols.get(key)
        k = used.get(key, 0)
        if pool is None or k >= len(pool):
            return None
        rho[w] = pool[k]
        used[key] = k + 1
    return rho


def relabel_right(B: BipartiteGraph, mapping) -> BipartiteGraph:
    return BipartiteGraph(B.n_left, B.n_right,
                          tuple((u, mapping[v], m) for u, v, m in B.edges))


# pipelines

BASES = ("complete", "circulant", "gabber_galil")


@dataclass(frozen=True)
class PipelineConfig:
    """Parameters for both pipelines; derived quantities are properties."""

    base: str = "complete"
    n: int = 4
    conn: tuple[int, ...] = ()
    m: int = 3
    power: int = 1
    inner_delta: object = 1
    inner_alpha: object = None
    inner_degree: int = 1
    inner_right: int | None = None
    gammas: tuple = (Fraction(1, 2),)
    gamma: object = Fraction(1, 2)
    epsilon: object = None
    beta: object = None
    n0_inner: int | None = None
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    samples_per_class: int = DEFAULT_SAMPLES
    exhaustive_max_size: int | None = None
    inner_max_attempts: int = 10_000

    def build_base(self) -> RegularGraph:
        if self.base == "complete":
            G = complete_graph(self.n)
        elif self.base == "circulant":
            G = circulant(self.n, self.conn)
        elif self.base == "gabber_galil":
            G = gabber_galil(self.m)
        else:
            raise ValueError(f"unknown base family {self.base!r}")
        return power(G, self.power) if self.power > 1 else G

    def inner_spec(self, n_left: int, delta=None) -> InnerSearchSpec:
        return InnerSearchSpec(
            n_left=n_left, degree=self.inner_degree,
            n_right=self.inner_right if self.inner_right is not None else n_left,
            delta=self.inner_delta if delta is None else delta, alpha=self.inner_alpha,
            seed=self.seed, max_attempts=self.inner_max_attempts)

    def beta_inner(self, n_left: int) -> Fraction:
        nr = self.inner_right if self.inner_right is not None else n_left
        return Fraction(nr, n_left)

    def mu(self, outer_alpha, outer_degree: int):
        """min{eps * alpha * delta' * d / 2, 1/n0'} when eps and n0' are set."""
        if self.epsilon is None or self.n0_inner is None:
            return None
        return min(as_fraction(self.epsilon) * as_fraction(outer_alpha)
                   * as_fraction(self.inner_delta) * outer_degree / 2,
                   Fraction(1, self.n0_inner))

    def echo(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            if isinstance(v, (Fraction, float)):
                v = fmt_num(v)
            elif isinstance(v, tuple):
                v = [fmt_num(x) if isinstance(x, (Fraction, float)) else x for x in v]
            out[k] = v
        return out


@dataclass
class Claim:
    name: str
    source: str
    delta: object
    alpha: object
    asserted: bool
    verdict: ExpansionVerdict | None = None
    note: str = ""

    @property
    def ok(self) -> bool:
        return not (self.asserted and self.verdict is not None and self.verdict.refuted)

    def as_dict(self) -> dict:
        return {
            "claim": self.name,
            "source": self.source,
            "delta": fmt_num(self.delta),
            "alpha": None if self.alpha is None else fmt_num(self.alpha),
            "asserted": self.asserted,
            "status": None if self.verdict is None else self.verdict.status,
            "witness": None if self.verdict is None or self.verdict.witness is None
            else list(self.verdict.witness),
            "ok": self.ok,
            "note": self.note,
        }


@dataclass
class Dossier:
    pipeline: str
    config: dict
    base: dict = field(default_factory=dict)
    outer: dict = field(default_factory=dict)
    inner: dict = field(default_factory=dict)
    product: dict = field(default_factory=dict)
    parameters: dict = field(default_factory=dict)
    claims: list[Claim] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.claims)

    def as_dict(self) -> dict:
        return {
            "pipeline": self.pipeline,
            "config": self.config,
            "base": self.base,
            "outer": self.outer,
            "inner": self.inner,
            "product": self.product,
            "parameters": self.parameters,
            "claims": [c.as_dict() for c in self.claims],
            "warnings": self.warnings,
            "ok": self.ok,
        }


def _verify_kw(cfg: PipelineConfig, workers: int) -> dict:
    return dict(budget=cfg.budget, seed=cfg.seed, exhaustive_max_size=cfg.exhaustive_max_size,
                samples_per_class=cfg.samples_per_class, workers=workers)


def _inner_for(cfg: PipelineConfig, n_left: int, delta, inner: BipartiteGraph | None,
               workers: int) -> InnerResult:
    if inner is not None:
        if inner.n_left != n_left:
            raise GraphError(f"supplied inner has {inner.n_left} left vertices, need {n_left}")
        verdict = certify_inner(inner, delta, cfg.inner_alpha, cfg.budget)
        if not verdict.certified:
            raise ValueError(f"supplied inner graph is not certified: {verdict.status}")
        spec = cfg.inner_spec(n_left, delta)
        return InnerResult(inner, verdict, 0, spec)
    return search_inner(cfg.inner_spec(n_left, delta), cfg.budget, workers)


def _inner_dict(res: InnerResult) -> dict:
    return {
        "spec": res.spec.as_dict(),
        "attempt": res.attempt,
        "supplied": res.attempt == 0,
        "graph": graph_digest(res.graph),
        "edges": [list(e) for e in res.graph.edges],
        "certificate": res.verdict.as_dict(),
    }


def _product_dict(H: BipartiteGraph, outer: BipartiteGraph, inner: BipartiteGraph) -> dict:
    return {
        "n_left": H.n_left,
        "n_right": H.n_right,
        "left_degree": H.d_left if H.is_left_regular else None,
        "simple": H.is_simple,
        "imbalance": fmt_num(Fraction(H.n_right, H.n_left)),
        "graph": graph_digest(H),
    }


def pipeline_spectral(cfg: PipelineConfig, base: RegularGraph | None = None,
                      inner: BipartiteGraph | None = None,
                      workers: int = 1) -> tuple[BipartiteGraph, Dossier]:
    """Incidence graph of a spectral expander routed through a certified inner graph."""
    G = base if base is not None else cfg.build_base()
    d = G.degree
    spec = lambda_of(G, "exact")
    lam = float(as_fraction(spec.lam))
    ratio = lam / d
    stripped, deficit = strip_loops(G)
    dossier = Dossier("spectral", cfg.echo())
    dossier.base = {"n": G.n, "d": d, "edges": G.num_edges, "spectrum": spec.as_dict(),
                    "loop_deficit": deficit, "loops_removed": sum(deficit)}
    regular_case = any(deficit)
    if regular_case:
        dossier.warnings.append(
            "loops stripped: incidence graph is only approximately (2, d)-biregular; "
            "claimed bounds are regular-case annotations")
    outer = edge_vertex_incidence(stripped)
    dossier.outer = {"n_left": outer.n_left, "n_right": outer.n_right,
                     "left_degree": outer.d_left,
                     "right_degree_min": int(outer.right_degrees.min()),
                     "right_degree_max": int(outer.right_degrees.max()),
                     "biregular": outer.is_biregular}

    res = _inner_for(cfg, d, cfg.inner_delta, inner, workers)
    dossier.inner = _inner_dict(res)
    H = routed_product(outer, res.graph, allow_irregular=regular_case)
    dossier.product = _product_dict(H, outer, res.graph)

    dp = as_fraction(cfg.inner_delta)
    dprime = cfg.inner_degree if inner is None else res.graph.d_left
    c = 2 * dprime
    kw = _verify_kw(cfg, workers)
    dossier.parameters = {
        "d": d, "lambda": lam, "lambda_over_d": ratio, "inner_delta": fmt_num(dp),
        "inner_alpha": None if cfg.inner_alpha is None else fmt_num(cfg.inner_alpha),
        "inner_degree": dprime, "left_degree_claimed": c,
        "left_degree_measured": H.d_left if H.is_left_regular else None,
        "beta_inner": fmt_num(Fraction(res.graph.n_right, res.graph.n_left)),
        "beta_tilde": fmt_num(2 * Fraction(res.graph.n_right, res.graph.n_left)),
        "regular_case": regular_case,
    }

    one = float(dp) * (float(dp) - ratio)
    if one > 0:
        v = check_un(H, one, ref_degree=c, **kw)
        dossier.claims.append(Claim("one-unique-neighbor", "spectral-one-UN", one, None, True, v))
    else:
        dossier.claims.append(Claim("one-unique-neighbor", "spectral-one-UN", one, None, False,
                                    note="bound nonpositive (lambda/d >= inner delta)"))
        dossier.warnings.append(f"lambda/d = {ratio:.6g} >= inner delta {fmt_num(dp)}")

    if cfg.inner_alpha is not None:
        ap = as_fraction(cfg.inner_alpha)
        for g in cfg.gammas:
            g = as_fraction(g)
            gd = float(g * dp)
            dl = gd * (gd - ratio)
            al = (1 - g) * ap / d
            if dl > 0:
                v = check_un_fraction(H, ExpansionParams(dl, al), ref_degree=c, **kw)
                dossier.claims.append(Claim(f"fraction gamma={fmt_num(g)}",
                                            "spectral-fraction-UN", dl, al, True, v))
            else:
                dossier.claims.append(Claim(f"fraction gamma={fmt_num(g)}",
                                            "spectral-fraction-UN", dl, al, False,
                                            note="bound nonpositive"))
        # headline recipe: gamma = 1/2, needs lambda <= delta' d / 4 and alpha' >= 1/2
        hd, ha = dp * dp / 8, Fraction(1, 4 * d)
        premise = ratio <= float(dp) / 4 + 1e-12 and ap >= Fraction(1, 2)
        v = check_un_fraction(H, ExpansionParams(hd, ha), ref_degree=c, **kw)
        dossier.claims.append(Claim("headline (c=2d', delta=delta'^2/8, alpha=1/(4d))",
                                    "spectral-headline", hd, ha, premise, v,
                                    note="" if premise else "premise lambda/d <= delta'/4 "
                                    "or alpha' >= 1/2 not met; verdict for study only"))
    for cl in dossier.claims:
        if not cl.ok:
            log.error("claim %s refuted: witness %s", cl.name, cl.verdict.witness)
    return H, dossier


def pipeline_comb(outer: BipartiteGraph, cfg: PipelineConfig, premise: ExpansionVerdict,
                  inner: BipartiteGraph | None = None,
                  workers: int = 1) -> tuple[BipartiteGraph, Dossier]:
    """Certified (delta, alpha) biregular outer routed through a
    (1/(gamma alpha d2), alpha')-UN inner graph."""
    if premise is None or premise.prop != "comb" or not premise.certified:
        raise ValueError("outer graph needs a certified combinatorial verdict")
    if premise.graph != graph_digest(outer):
        raise ValueError("premise verdict was issued for a different graph")
    if not outer.is_biregular:
        raise GraphError("outer graph must be biregular")
    g = as_fraction(cfg.gamma)
    if not (0 < g < 1):
        raise ValueError("gamma must lie in the open interval (0, 1)")
    delta, alpha = as_fraction(premise.delta), as_fraction(premise.alpha)
    d1, d2 = outer.d_left, outer.d_right
    if not d2 > 1 / (g * alpha):
        raise ValueError(f"need right degree {d2} > 1/(gamma alpha) = {fmt_num(1 / (g * alpha))}")
    inner_delta = 1 / (g * alpha * d2)

    dossier = Dossier("comb", cfg.echo())
    dossier.outer = {"n_left": outer.n_left, "n_right": outer.n_right, "d1": d1, "d2": d2,
                     "delta": fmt_num(delta), "alpha": fmt_num(alpha),
                     "premise": premise.as_dict(), "graph": graph_digest(outer)}
    res = _inner_for(cfg, d2, inner_delta, inner, workers)
    dossier.inner = _inner_dict(res)
    H = routed_product(outer, res.graph)
    dossier.product = _product_dict(H, outer, res.graph)
    dprime = res.graph.d_left
    c = d1 * dprime
    beta_inner = Fraction(res.graph.n_right, res.graph.n_left)
    dossier.parameters = {
        "d1": d1, "d2": d2, "gamma": fmt_num(g), "inner_delta": fmt_num(inner_delta),
        "inner_alpha": None if cfg.inner_alpha is None else fmt_num(cfg.inner_alpha),
        "inner_degree": dprime, "left_degree_claimed": c,
        "left_degree_measured": H.d_left, "beta_inner": fmt_num(beta_inner),
        "beta_tilde": fmt_num(d1 * beta_inner), "mu_measured": fmt_num(Fraction(d1, d2)),
    }
    kw = _verify_kw(cfg, workers)
    v = check_un(H, delta, ref_degree=c, **kw)
    dossier.claims.append(Claim("one-unique-neighbor", "comb-one-UN", delta, None, True, v))
    if cfg.inner_alpha is not None:
        ap = as_fraction(cfg.inner_alpha)
        al = (1 - g) * ap * alpha
        v = check_un_fraction(H, ExpansionParams(delta, al), ref_degree=c, **kw)
        dossier.claims.append(Claim("fraction", "comb-fraction-UN", delta, al, True, v))
        if cfg.epsilon is not None:
            eps = as_fraction(cfg.epsilon)
            mu = cfg.mu(alpha, d1)
            dossier.parameters["mu_recipe"] = None if mu is None else fmt_num(mu)
            recipe = g == eps / 2 and ap >= 1 - eps / 2
            hv = check_un_fraction(H, ExpansionParams(delta, (1 - eps) * alpha), ref_degree=c,
                                   **kw)
            dossier.claims.append(Claim(
                "headline (delta, (1-eps) alpha)", "comb-headline", delta, (1 - eps) * alpha,
                recipe, hv,
                note="" if recipe else "gamma != eps/2 or alpha' < 1 - eps/2; study only"))
    for cl in dossier.claims:
        if not cl.ok:
            log.error("claim %s refuted: witness %s", cl.name, cl.verdict.witness)
    return H, dossier
