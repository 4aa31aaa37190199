#!/usr/bin/env python3
"""Sweep inner-graph search over (n_left, degree, n_right, delta, alpha).

Writes a dual-format report listing, per grid point, whether a certified
graph was found and on which attempt, or the best near miss otherwise.
"""

import argparse
import itertools
import time
from fractions import Fraction

from unexpand.inner import InnerSearchSpec, SearchExhausted, search_inner
from unexpand.report import render, table, write_with_manifest
from unexpand.util import fmt_num


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--left", type=int, nargs="+", default=[3, 4, 6, 8])
    ap.add_argument("--degree", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--beta", type=Fraction, nargs="+", default=[Fraction(1), Fraction(2)])
    ap.add_argument("--delta", type=Fraction, nargs="+", default=[Fraction(1, 2), Fraction(1)])
    ap.add_argument("--alpha", type=Fraction, nargs="+", default=[Fraction(1, 2), Fraction(1)])
    ap.add_argument("--attempts", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="inner_sweep.txt")
    args = ap.parse_args()

    rows, records = [], []
    for nl, d, beta, delta, alpha in itertools.product(args.left, args.degree, args.beta,
                                                       args.delta, args.alpha):
        nr = int(beta * nl)
        if d > nr:
            continue
        spec = InnerSearchSpec(nl, d, nr, delta, alpha, seed=args.seed,
                               max_attempts=args.attempts)
        t0 = time.perf_counter()
        try:
            res = search_inner(spec)
            outcome, attempt, miss = "found", res.attempt, None
        except SearchExhausted as exc:
            outcome, attempt, miss = "exhausted", None, exc.near_miss
        dt = time.perf_counter() - t0
        rows.append([nl, d, nr, fmt_num(delta), fmt_num(alpha), outcome,
                     "-" if attempt is None else attempt, f"{dt:.2f}"])
        records.append({**spec.as_dict(), "outcome": outcome, "attempt": attempt,
                        "near_miss": miss})
    lines = table(rows, ["n_left", "degree", "n_right", "delta", "alpha", "outcome", "attempt",
                         "seconds"])
    text = render("inner search sweep", lines, {"points": records})
    print(text, end="")
    write_with_manifest(args.out, text, "sweep_inner", vars(args) | {
        "beta": [fmt_num(b) for b in args.beta], "delta": [fmt_num(x) for x in args.delta],
        "alpha": [fmt_num(x) for x in args.alpha]}, args.seed, {})


if __name__ == "__main__":
    main()
