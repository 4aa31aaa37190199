"""Brute-force search for small certified inner unique-neighbor expanders."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .graphs import BipartiteGraph, GraphError
from .util import as_fraction, fmt_num, make_rng, max_eligible_size
from .verify import (DEFAULT_BUDGET, ExpansionParams, ExpansionVerdict, check_combinatorial,
                     check_un, check_un_fraction)


@dataclass(frozen=True)
class InnerSearchSpec:
    n_left: int
    degree: int
    n_right: int
    delta: object
    alpha: object = None
    seed: int = 0
    max_attempts: int = 10_000
    prop: str = "un"  # "un" (fraction form when alpha is set) or "comb"

    def __post_init__(self):
        if self.n_right < 1 or self.n_left < 1:
            raise ValueError("inner graph needs nonempty sides")
        if not (1 <= self.degree <= self.n_right):
            raise ValueError(f"degree must lie in 1..n_right, got {self.degree}")
        if not (0 < as_fraction(self.delta) <= 1):
            raise ValueError("delta must lie in (0, 1]")
        if self.prop not in ("un", "comb"):
            raise ValueError(f"unknown property {self.prop!r}")
        if self.prop == "comb" and self.alpha is None:
            raise ValueError("combinatorial search needs alpha")

    @property
    def beta(self) -> float:
        return self.n_right / self.n_left

    def as_dict(self) -> dict:
        return {
            "n_left": self.n_left, "degree": self.degree, "n_right": self.n_right,
            "delta": fmt_num(self.delta),
            "alpha": None if self.alpha is None else fmt_num(self.alpha),
            "seed": self.seed, "max_attempts": self.max_attempts, "prop": self.prop,
        }


class InsufficientBudget(RuntimeError):
    pass


class SearchExhausted(RuntimeError):
    def __init__(self, spec: InnerSearchSpec, attempts: int, near_miss: dict | None):
        self.spec = spec
        self.attempts = attempts
        self.near_miss = near_miss
        super().__init__(
            f"no certified inner graph in {attempts} attempts "
            f"(best near miss: {near_miss})")


@dataclass(frozen=True)
class InnerResult:
    graph: BipartiteGraph
    verdict: ExpansionVerdict
    attempt: int
    spec: InnerSearchSpec


def random_left_regular(rng: np.random.Generator, n_left: int, degree: int,
                        n_right: int) -> BipartiteGraph:
    """Each left vertex picks ``degree`` distinct uniform right neighbors."""
    picks = np.argpartition(rng.random((n_left, n_right)), degree - 1, axis=1)[:, :degree]
    pairs = [(u, int(v)) for u in range(n_left) for v in np.sort(picks[u])]
    return BipartiteGraph.from_pairs(n_left, n_right, pairs, left_degree=degree)


def certify_inner(B: BipartiteGraph, delta, alpha=None, budget: int = DEFAULT_BUDGET,
                  prop: str = "un") -> ExpansionVerdict:
    """Exhaustive-only certificate: certified or refuted, never merely tested."""
    if not B.is_left_regular:
        raise GraphError("inner graph must be left-regular")
    kmax = max_eligible_size(delta, B.n_left)
    total = sum(math.comb(B.n_left, k) for k in range(1, kmax + 1))
    if total > budget:
        raise InsufficientBudget(f"{total} subsets exceed the budget {budget}")
    kw = dict(budget=budget, samples_per_class=0)
    if prop == "comb":
        return check_combinatorial(B, ExpansionParams(delta, alpha), **kw)
    if alpha is None:
        return check_un(B, delta, **kw)
    return check_un_fraction(B, ExpansionParams(delta, alpha), **kw)


def _attempt(spec: InnerSearchSpec, i: int, budget: int):
    rng = make_rng(spec.seed, "inner", str(i))
    B = random_left_regular(rng, spec.n_left, spec.degree, spec.n_right)
    return B, certify_inner(B, spec.delta, spec.alpha, budget, spec.prop)


def _miss_key(v: ExpansionVerdict):
    k = len(v.witness)
    return (k, -(v.witness_required - v.witness_value))


def search_inner(spec: InnerSearchSpec, budget: int = DEFAULT_BUDGET,
                 workers: int = 1) -> InnerResult:
    near = None
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        i = 1
        while i <= spec.max_attempts:
            batch = list(range(i, min(spec.max_attempts, i + max(1, workers) - 1) + 1))
            if pool:
                outs = list(pool.map(lambda j: _attempt(spec, j, budget), batch))
            else:
                outs = [_attempt(spec, j, budget) for j in batch]
            for j, (B, verdict) in zip(batch, outs):
                if verdict.certified:
                    return InnerResult(B, verdict, j, spec)
                if near is None or _miss_key(verdict) > _miss_key(near[1]):
                    near = (j, verdict)
            i = batch[-1] + 1
    finally:
        if pool:
            pool.shutdown()
    miss = None
    if near is not None:
        j, v = near
        miss = {"attempt": j, "violated_size": len(v.witness),
                "deficit": v.witness_required - v.witness_value}
    raise SearchExhausted(spec, spec.max_attempts, miss)
