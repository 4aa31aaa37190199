#!/usr/bin/env python3
"""Tabulate lambda/d for the base families and their powers.

Powering keeps the ratio's k-th power while the degree grows as d^k, which
is the trade-off that decides whether the one-unique-neighbor bound
delta'(delta' - lambda/d) is positive for a given inner delta'.
"""

import argparse

from unexpand.report import render, table, write_with_manifest
from unexpand.spectral import circulant, complete_graph, gabber_galil, lambda_of, power


def families(max_m):
    yield "K4", complete_graph(4)
    yield "K6", complete_graph(6)
    yield "circ8{1,4,7}", circulant(8, [1, 4, 7])
    yield "circ13{1,5,8,12}", circulant(13, [1, 5, 8, 12])
    for m in range(3, max_m + 1):
        yield f"gg{m}", gabber_galil(m)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-m", type=int, default=12)
    ap.add_argument("--max-power", type=int, default=3)
    ap.add_argument("--out", default="spectral_ratios.txt")
    args = ap.parse_args()
    rows, data = [], []
    for name, G in families(args.max_m):
        for k in range(1, args.max_power + 1):
            H = power(G, k) if k > 1 else G
            rep = lambda_of(H)
            rows.append([name, k, H.n, H.degree, f"{rep.lam:.6f}", f"{rep.ratio:.6f}",
                         rep.solver])
            data.append({"graph": name, "power": k, **rep.as_dict()})
    text = render("lambda/d by family and power",
                  table(rows, ["graph", "power", "n", "d", "lambda", "lambda/d", "solver"]),
                  {"rows": data})
    print(text, end="")
    write_with_manifest(args.out, text, "spectral_ratios", vars(args), None, {})


if __name__ == "__main__":
    main()
