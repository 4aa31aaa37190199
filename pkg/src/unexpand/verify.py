"""Certify or refute (unique-neighbor) expansion by subset enumeration.

Every check walks the eligible left subsets (``|S| < delta * n_left``) size
class by size class in lexicographic order. Classes are enumerated in full
while the cumulative count stays within ``budget`` (and, optionally, up to
``exhaustive_max_size``); later classes are sampled without replacement from
a seeded stream. A verdict is ``certified`` only when every eligible class
was covered in full.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .graphs import (BipartiteGraph, GraphError, RegularGraph, check_counts,
                     edge_vertex_incidence, serialize)
from .spectral import lambda_of
from .util import as_fraction, ceil_frac, fmt_num, make_rng, max_eligible_size

DEFAULT_BUDGET = 10**7
DEFAULT_SAMPLES = 10**5
CERTIFIED, TESTED, REFUTED = "certified", "tested", "refuted"
_CELLS_PER_CHUNK = 1 << 22


def graph_digest(B) -> str:
    return hashlib.sha256(serialize(B).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class ExpansionParams:
    delta: Fraction | float
    alpha: Fraction | float | None = None
    gamma: Fraction | float | None = None
    epsilon: Fraction | float | None = None

    def __post_init__(self):
        # delta > 1 is allowed: it makes the whole left side eligible
        if not as_fraction(self.delta) > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.alpha is not None and not (0 < as_fraction(self.alpha) <= 1):
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.gamma is not None and not (0 < as_fraction(self.gamma) < 1 + 1e-12):
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma}")
        if self.epsilon is not None and not (0 <= as_fraction(self.epsilon) < 1):
            raise ValueError(f"epsilon must lie in [0, 1), got {self.epsilon}")


@dataclass(frozen=True)
class ExpansionVerdict:
    status: str
    prop: str
    delta: object
    alpha: object
    ref_degree: int
    n_left: int
    max_eligible_size: int
    witness: tuple[int, ...] | None = None
    witness_value: int | None = None
    witness_required: int | None = None
    enumerated: int = 0
    sampled: int = 0
    max_size_exhausted: int = 0
    vacuous: bool = False
    irregular: bool = False
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    samples_per_class: int = DEFAULT_SAMPLES
    graph: str = ""
    classes: tuple[tuple[int, str, int], ...] = field(default=(), repr=False)

    @property
    def certified(self) -> bool:
        return self.status == CERTIFIED

    @property
    def refuted(self) -> bool:
        return self.status == REFUTED

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "property": self.prop,
            "delta": fmt_num(self.delta),
            "alpha": None if self.alpha is None else fmt_num(self.alpha),
            "ref_degree": self.ref_degree,
            "irregular": self.irregular,
            "n_left": self.n_left,
            "max_eligible_size": self.max_eligible_size,
            "vacuous": self.vacuous,
            "witness": None if self.witness is None else list(self.witness),
            "witness_value": self.witness_value,
            "witness_required": self.witness_required,
            "enumerated": self.enumerated,
            "sampled": self.sampled,
            "max_size_exhausted": self.max_size_exhausted,
            "seed": self.seed,
            "budget": self.budget,
            "samples_per_class": self.samples_per_class,
            "graph": self.graph,
            "classes": [list(c) for c in self.classes],
        }


# subset machinery

def subset_counts(B: BipartiteGraph, subsets: np.ndarray) -> np.ndarray:
    """Row i: multiplicity from the left subset ``subsets[i]`` into each right vertex."""
    m = subsets.shape[0]
    width = B.n_right + 1
    nb = B.left_nbr_table[subsets].reshape(m, -1)
    idx = nb + (np.arange(m, dtype=np.int64) * width)[:, None]
    counts = np.bincount(idx.ravel(), minlength=m * width).reshape(m, width)
    return counts[:, :B.n_right]


def _chunk_rows(B: BipartiteGraph) -> int:
    return max(1, _CELLS_PER_CHUNK // (B.n_right + 1))


def _combination_chunks(n: int, k: int, rows: int):
    it = itertools.combinations(range(n), k)
    while True:
        block = list(itertools.islice(it, rows))
        if not block:
            return
        yield np.array(block, dtype=np.int64).reshape(len(block), k)


def sample_subsets(rng: np.random.Generator, n: int, k: int, count: int) -> np.ndarray:
    """``count`` distinct uniform k-subsets of range(n), rows sorted, in draw order."""
    seen: dict[bytes, None] = {}
    rows = []
    while len(rows) < count:
        need = count - len(rows)
        batch = max(64, int(need * 1.2))
        if k * 4 <= n:
            cand = np.sort(rng.integers(0, n, size=(batch, k)), axis=1)
            ok = (np.diff(cand, axis=1) > 0).all(axis=1) if k > 1 else np.ones(batch, bool)
            cand = cand[ok]
        else:
            cand = np.sort(np.argpartition(rng.random((batch, n)), k - 1, axis=1)[:, :k], axis=1)
        for row in cand:
            key = row.tobytes()
            if key not in seen:
                seen[key] = None
                rows.append(row)
                if len(rows) == count:
                    break
    return np.array(rows, dtype=np.int64).reshape(count, k)


Violates = Callable[[np.ndarray, int], np.ndarray]


@dataclass
class ScanResult:
    witness: tuple[int, ...] | None
    enumerated: int
    sampled: int
    max_size_exhausted: int
    complete: bool
    classes: list[tuple[int, str, int]]
    hits: int = 0


def scan_subsets(B: BipartiteGraph, kmax: int, violates: Violates, *, budget: int,
                 exhaustive_max_size: int | None, samples_per_class: int, seed: int,
                 label: str, workers: int = 1, stop_at_first: bool = True,
                 hits: Callable[[np.ndarray, int], int] | None = None) -> ScanResult:
    """Walk size classes 1..kmax; ``violates(counts, k)`` flags bad rows."""
    n = B.n_left
    rows = _chunk_rows(B)
    enumerated = sampled = 0
    exhausted_prefix = 0
    prefix_open = True
    classes = []
    total_hits = 0
    witness = None
    pool = ThreadPoolExecutor(workers) if workers > 1 else None

    def evaluate(block):
        counts = subset_counts(B, block)
        bad = violates(counts, block.shape[1])
        h = hits(counts, block.shape[1]) if hits is not None else 0
        first = int(np.argmax(bad)) if bad.any() else -1
        return first, h

    def run(blocks):
        """First violating row in block order and the rows consumed up to it."""
        nonlocal total_hits
        found, consumed, seen = None, 0, 0
        blocks = iter(blocks)
        while True:
            group = list(itertools.islice(blocks, max(1, workers)))
            if not group:
                return found, (consumed if found is not None else seen)
            outs = pool.map(evaluate, group) if pool else map(evaluate, group)
            for block, (first, h) in zip(group, outs):
                if found is not None and stop_at_first:
                    break
                total_hits += h
                if first >= 0 and found is None:
                    found = tuple(int(x) for x in block[first])
                    consumed = seen + first + 1
                seen += block.shape[0]
            if found is not None and stop_at_first:
                return found, consumed

    try:
        for k in range(1, kmax + 1):
            total = math.comb(n, k)
            within_budget = enumerated + total <= budget
            within_size = exhaustive_max_size is None or k <= exhaustive_max_size
            if (within_budget and within_size) or total <= samples_per_class:
                found, used = run(_combination_chunks(n, k, rows))
                enumerated += used
                classes.append((k, "exhaustive", used))
                if prefix_open and (found is None or not stop_at_first):
                    exhausted_prefix = k
            else:
                prefix_open = False
                rng = make_rng(seed, "verify", label, str(k))
                picks = sample_subsets(rng, n, k, samples_per_class)
                found, used = run(np.array_split(picks, max(1, math.ceil(len(picks) / rows))))
                sampled += used
                classes.append((k, "sampled", used))
            if found is not None and witness is None:
                witness = found
                if stop_at_first:
                    break
    finally:
        if pool:
            pool.shutdown()
    complete = witness is None and all(kind == "exhaustive" for _, kind, _ in classes)
    return ScanResult(witness, enumerated, sampled, exhausted_prefix, complete, classes,
                      total_hits)


# expansion checks

def _ref_degree(B: BipartiteGraph, ref_degree: int | None) -> tuple[int, bool]:
    if B.is_left_regular:
        d = B.d_left
        if ref_degree is not None and ref_degree != d:
            return int(ref_degree), True
        return d, False
    if ref_degree is None:
        ref_degree = int(B.left_degrees.max())
    return int(ref_degree), True


def _run_check(B, prop, delta, alpha, violates_for, value_of, required_of, *, budget, seed,
               ref_degree, exhaustive_max_size, samples_per_class, workers):
    d, irregular = _ref_degree(B, ref_degree)
    kmax = max_eligible_size(delta, B.n_left)
    common = dict(prop=prop, delta=delta, alpha=alpha, ref_degree=d, n_left=B.n_left,
                  max_eligible_size=kmax, irregular=irregular, seed=seed, budget=budget,
                  samples_per_class=samples_per_class, graph=graph_digest(B))
    if kmax == 0:
        return ExpansionVerdict(CERTIFIED, vacuous=True, **common)
    res = scan_subsets(B, kmax, violates_for(d), budget=budget,
                       exhaustive_max_size=exhaustive_max_size,
                       samples_per_class=samples_per_class, seed=seed,
                       label=f"{prop}:{fmt_num(delta)}:{fmt_num(alpha)}", workers=workers)
    trace = dict(enumerated=res.enumerated, sampled=res.sampled,
                 max_size_exhausted=res.max_size_exhausted, classes=tuple(res.classes))
    if res.witness is not None:
        counts = check_counts(B, res.witness)
        k = len(res.witness)
        return ExpansionVerdict(REFUTED, witness=res.witness,
                                witness_value=value_of(counts),
                                witness_required=required_of(d, k), **trace, **common)
    return ExpansionVerdict(CERTIFIED if res.complete else TESTED, **trace, **common)


def _threshold(alpha, d: int, k: int) -> int:
    return ceil_frac(as_fraction(alpha) * d * k)


def check_combinatorial(B: BipartiteGraph, p: ExpansionParams, budget: int = DEFAULT_BUDGET,
                        seed: int = 0, *, ref_degree: int | None = None,
                        exhaustive_max_size: int | None = None,
                        samples_per_class: int = DEFAULT_SAMPLES,
                        workers: int = 1) -> ExpansionVerdict:
    """|Gamma(S)| >= ceil(alpha * d * |S|) for every eligible S."""
    if p.alpha is None:
        raise ValueError("combinatorial check needs alpha")

    def violates_for(d):
        def f(counts, k):
            return (counts > 0).sum(axis=1) < _threshold(p.alpha, d, k)
        return f

    return _run_check(B, "comb", p.delta, p.alpha, violates_for,
                      lambda c: int((c > 0).sum()),
                      lambda d, k: _threshold(p.alpha, d, k),
                      budget=budget, seed=seed, ref_degree=ref_degree,
                      exhaustive_max_size=exhaustive_max_size,
                      samples_per_class=samples_per_class, workers=workers)


def check_un(B: BipartiteGraph, delta, budget: int = DEFAULT_BUDGET, seed: int = 0, *,
             ref_degree: int | None = None, exhaustive_max_size: int | None = None,
             samples_per_class: int = DEFAULT_SAMPLES, workers: int = 1) -> ExpansionVerdict:
    """Every eligible S has at least one unique neighbor."""
    if isinstance(delta, ExpansionParams):
        delta = delta.delta

    def violates_for(d):
        def f(counts, k):
            return ~(counts == 1).any(axis=1)
        return f

    return _run_check(B, "un", delta, None, violates_for,
                      lambda c: int((c == 1).sum()), lambda d, k: 1,
                      budget=budget, seed=seed, ref_degree=ref_degree,
                      exhaustive_max_size=exhaustive_max_size,
                      samples_per_class=samples_per_class, workers=workers)


def check_un_fraction(B: BipartiteGraph, p: ExpansionParams, budget: int = DEFAULT_BUDGET,
                      seed: int = 0, *, ref_degree: int | None = None,
                      exhaustive_max_size: int | None = None,
                      samples_per_class: int = DEFAULT_SAMPLES,
                      workers: int = 1) -> ExpansionVerdict:
    """|Gamma_uni(S)| >= ceil(alpha * d * |S|) for every eligible S."""
    if p.alpha is None:
        raise ValueError("fraction check needs alpha")

    def violates_for(d):
        def f(counts, k):
            return (counts == 1).sum(axis=1) < _threshold(p.alpha, d, k)
        return f

    return _run_check(B, "un-fraction", p.delta, p.alpha, violates_for,
                      lambda c: int((c == 1).sum()),
                      lambda d, k: _threshold(p.alpha, d, k),
                      budget=budget, seed=seed, ref_degree=ref_degree,
                      exhaustive_max_size=exhaustive_max_size,
                      samples_per_class=samples_per_class, workers=workers)


def recheck(B: BipartiteGraph, verdict: ExpansionVerdict) -> bool:
    """True iff a refuted verdict's witness still violates its bound."""
    if verdict.witness is None:
        return False
    S = verdict.witness
    if not (0 < len(S) <= verdict.max_eligible_size):
        return False
    counts = check_counts(B, S)
    k = len(S)
    if verdict.prop == "comb":
        return int((counts > 0).sum()) < _threshold(verdict.alpha, verdict.ref_degree, k)
    if verdict.prop == "un":
        return not (counts == 1).any()
    if verdict.prop == "un-fraction":
        return int((counts == 1).sum()) < _threshold(verdict.alpha, verdict.ref_degree, k)
    raise ValueError(f"unknown property {verdict.prop!r}")


@dataclass(frozen=True)
class Fact1Report:
    delta: object
    epsilon: object
    premise: ExpansionVerdict
    conclusion: ExpansionVerdict | None

    @property
    def holds(self) -> bool:
        return not (self.premise.certified and self.conclusion is not None
                    and self.conclusion.refuted)

    def as_dict(self) -> dict:
        return {
            "delta": fmt_num(self.delta),
            "epsilon": fmt_num(self.epsilon),
            "holds": self.holds,
            "premise": self.premise.as_dict(),
            "conclusion": None if self.conclusion is None else self.conclusion.as_dict(),
        }


def check_fact1(B: BipartiteGraph, delta, epsilon, budget: int = DEFAULT_BUDGET,
                seed: int = 0, **kw) -> Fact1Report:
    """Combinatorial (delta, 1-eps) expansion should imply (delta, 1-2eps) UN expansion."""
    eps = as_fraction(epsilon)
    if not (0 <= eps < Fraction(1, 2)):
        raise ValueError("epsilon must be below 1/2 (the implication is vacuous otherwise)")
    premise = check_combinatorial(B, ExpansionParams(delta, 1 - eps), budget, seed, **kw)
    conclusion = None
    if premise.certified:
        conclusion = check_un_fraction(B, ExpansionParams(delta, 1 - 2 * eps), budget, seed,
                                       **kw)
    return Fact1Report(delta, epsilon, premise, conclusion)


def find_light_check(B: BipartiteGraph, S, threshold) -> int | None:
    """Smallest right vertex touched by S that meets S fewer than ``threshold`` times."""
    counts = check_counts(B, S)
    if not counts.any():
        raise GraphError("S must be nonempty")
    t = as_fraction(threshold)
    light = np.flatnonzero((counts > 0) & np.array([c < t for c in counts]))
    return int(light[0]) if light.size else None


def expansion_profile(B: BipartiteGraph, kmax: int) -> list[dict]:
    """Per size class: minimum |Gamma(S)| and minimum |Gamma_uni(S)| (exhaustive)."""
    out = []
    rows = _chunk_rows(B)
    for k in range(1, kmax + 1):
        lo_n = lo_u = None
        for block in _combination_chunks(B.n_left, k, rows):
            c = subset_counts(B, block)
            nb = int((c > 0).sum(axis=1).min())
            un = int((c == 1).sum(axis=1).min())
            lo_n = nb if lo_n is None else min(lo_n, nb)
            lo_u = un if lo_u is None else min(lo_u, un)
        out.append({"size": k, "min_neighbors": lo_n, "min_unique": lo_u})
    return out


# finite replications of the size lemmas

@dataclass(frozen=True)
class LemmaReport:
    lemma: str
    params: dict
    mode: str
    checked: int
    hypothesis_holds: int
    violations: int
    bound: float
    witness: tuple[int, ...] | None = None

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def as_dict(self) -> dict:
        return {
            "lemma": self.lemma,
            "params": self.params,
            "mode": self.mode,
            "checked": self.checked,
            "hypothesis_holds": self.hypothesis_holds,
            "violations": self.violations,
            "bound": self.bound,
            "witness": None if self.witness is None else list(self.witness),
            "ok": self.ok,
        }


EDGE_GUARD = 20
BOUND_SLACK = 1e-9


def _edge_subset_masks(m: int, mode: str, count: int, seed: int, label: str):
    if mode == "exhaustive":
        if m > EDGE_GUARD:
            raise ValueError(f"exhaustive edge-subset sweep guarded at |E| <= {EDGE_GUARD}")
        masks = np.arange(1, 1 << m, dtype=np.int64)
        return np.array_split(masks, max(1, masks.size // 65536))
    if mode == "sampled":
        rng = make_rng(seed, "lemma", label)
        bits = rng.integers(0, 2, size=(count, m), dtype=np.int64)
        return [bits]
    raise ValueError(f"unknown mode {mode!r}")


def lemma_fraction_size_check(G: RegularGraph, delta, gamma=1, mode: str = "exhaustive",
                              lam: float | None = None, count: int = DEFAULT_SAMPLES,
                              seed: int = 0) -> LemmaReport:
    """Edge sets S where at least a gamma-fraction of the touched vertices see
    >= delta*d edges of S must have |S| >= g*d*(g*d - lam/deg)|E| with g*d = gamma*delta."""
    d = G.degree
    if lam is None:
        lam = lambda_of(G).lam
    I = edge_vertex_incidence(G).matrix
    m = I.shape[0]
    dl, gm = as_fraction(delta), as_fraction(gamma)
    gd = float(gm * dl)
    bound = gd * (gd - lam / d) * m
    need = ceil_frac(dl * d)
    checked = hyp = viol = 0
    witness = None
    for block in _edge_subset_masks(m, mode, count, seed, f"fraction:{delta}:{gamma}"):
        bits = block if block.ndim == 2 else ((block[:, None] >> np.arange(m)) & 1)
        bits = bits[bits.any(axis=1)]
        counts = bits @ I
        touched = (counts > 0).sum(axis=1)
        heavy = (counts >= need).sum(axis=1)
        ok = heavy * gm.denominator >= gm.numerator * touched
        size = bits.sum(axis=1)
        bad = ok & (size < bound - BOUND_SLACK)
        checked += bits.shape[0]
        hyp += int(ok.sum())
        viol += int(bad.sum())
        if witness is None and bad.any():
            witness = tuple(int(e) for e in np.flatnonzero(bits[int(np.argmax(bad))]))
    name = "edge-size" if gm == 1 else "edge-size-fraction"
    return LemmaReport(name, {"delta": fmt_num(delta), "gamma": fmt_num(gamma),
                              "lambda": lam, "d": d, "edges": m},
                       mode, checked, hyp, viol, bound, witness)


def lemma_spectral_size_check(G: RegularGraph, delta, mode: str = "exhaustive",
                              lam: float | None = None, count: int = DEFAULT_SAMPLES,
                              seed: int = 0) -> LemmaReport:
    """Edge sets whose touched vertices all see >= delta*d of their edges
    must have |S| >= delta*(delta - lam/d)*|E|."""
    return lemma_fraction_size_check(G, delta, 1, mode, lam, count, seed)


def lemma_comb_size_check(B: BipartiteGraph, delta, alpha, gamma=1, mode: str = "exhaustive",
                          premise: ExpansionVerdict | None = None,
                          budget: int = DEFAULT_BUDGET, count: int = DEFAULT_SAMPLES,
                          seed: int = 0, workers: int = 1) -> LemmaReport:
    """In a certified (delta, alpha) biregular expander, a left set where at
    least a gamma-fraction of Gamma(S) meets S more than 1/(gamma*alpha)
    times has |S| >= delta*|L|."""
    if not B.is_biregular:
        raise GraphError("lemma check needs a biregular graph")
    if premise is None:
        premise = check_combinatorial(B, ExpansionParams(delta, alpha), budget, seed,
                                      workers=workers)
    if not premise.certified or premise.prop != "comb":
        raise ValueError("combinatorial premise is not certified")
    if (as_fraction(premise.delta), as_fraction(premise.alpha)) != (
            as_fraction(delta), as_fraction(alpha)):
        raise ValueError("premise verdict was issued for different parameters")
    ga = as_fraction(gamma) * as_fraction(alpha)
    gm = as_fraction(gamma)
    kmax = max_eligible_size(delta, B.n_left)

    def hypothesis(counts, k):
        heavy = (counts * ga.numerator > ga.denominator).sum(axis=1)
        touched = (counts > 0).sum(axis=1)
        return heavy * gm.denominator >= gm.numerator * touched

    res = scan_subsets(B, kmax, hypothesis, budget=budget,
                       exhaustive_max_size=None if mode == "exhaustive" else 0,
                       samples_per_class=count, seed=seed,
                       label=f"lemma-comb:{delta}:{alpha}:{gamma}", workers=workers,
                       stop_at_first=False, hits=lambda c, k: int(hypothesis(c, k).sum()))
    checked = res.enumerated + res.sampled
    name = "comb-size" if gm == 1 else "comb-size-fraction"
    return LemmaReport(name, {"delta": fmt_num(delta), "alpha": fmt_num(alpha),
                              "gamma": fmt_num(gamma), "n_left": B.n_left},
                       mode, checked, res.hits, res.hits, float(as_fraction(delta) * B.n_left),
                       res.witness)
