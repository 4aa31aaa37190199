"""Command-line front end.

Exit codes: 0 success (certified or tested without refutation), 1 refuted
or codes unequal, 2 invalid parameters, 3 the wrapped operation failed
(search exhausted, budget too small, no convergence).
"""

from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .codes import (AlistError, ParityCheckMatrix, code_dimension, distance_lb_from_un,
                    export_alist, gf2_rank, import_alist, min_distance_exhaustive,
                    routed_ss2_equivalence, ss1_matrix, ss2_matrix)
from .compose import PipelineConfig, pipeline_comb, pipeline_spectral, routed_product
from .fixtures import by_name
from .graphs import (BipartiteGraph, GraphError, RegularGraph, deserialize,
                     edge_vertex_incidence, serialize, strip_loops)
from .inner import InnerSearchSpec, InsufficientBudget, SearchExhausted, search_inner
from .report import digest_bytes, env_int, render, table, write_with_manifest
from .spectral import (ConvergenceError, circulant, complete_graph, gabber_galil, lambda_of,
                       mixing_audit, power)
from .util import fmt_num
from .verify import (DEFAULT_BUDGET, DEFAULT_SAMPLES, ExpansionParams, check_combinatorial,
                     check_fact1, check_un, check_un_fraction, lemma_comb_size_check,
                     lemma_fraction_size_check)

log = logging.getLogger("unexpand")

EXIT_OK, EXIT_REFUTED, EXIT_USAGE, EXIT_FAILED = 0, 1, 2, 3
MIXING_TOL = 1e-9


class UsageError(Exception):
    pass


def frac(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number or fraction: {text!r}")


def int_list(text: str) -> list[int]:
    return [int(t) for t in text.replace(",", " ").split()]


def frac_list(text: str) -> list[Fraction]:
    return [frac(t) for t in text.replace(",", " ").split()]


# graph I/O

def load_graph(spec: str):
    """A path to an interchange document, or ``fixture:NAME``."""
    if spec.startswith("fixture:"):
        obj = by_name(spec.split(":", 1)[1])
        return obj, {spec: digest_bytes(serialize(obj).encode())}
    path = Path(spec)
    data = path.read_bytes()
    return deserialize(data.decode()), {path.name: digest_bytes(data)}


def load_matrix(spec: str):
    path = Path(spec)
    data = path.read_bytes()
    return import_alist(data.decode()), {path.name: digest_bytes(data)}


def _need(obj, kind, what):
    if not isinstance(obj, kind):
        raise UsageError(f"{what} needs a {'bipartite graph' if kind is BipartiteGraph else 'regular graph'}")
    return obj


def _params_echo(args, drop=("func", "workers", "out", "report", "graph_out", "verbose")):
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in drop:
            continue
        if isinstance(v, Fraction):
            v = fmt_num(v)
        elif isinstance(v, list):
            v = [fmt_num(x) if isinstance(x, Fraction) else x for x in v]
        out[k] = v
    return out


def _emit(args, text: str, inputs: dict, command: str):
    sys.stdout.write(text)
    target = getattr(args, "report", None) or getattr(args, "out", None)
    if target:
        write_with_manifest(target, text, command, _params_echo(args),
                            getattr(args, "seed", None), inputs)


# build

def cmd_build(args) -> int:
    kind = args.kind
    inputs: dict = {}
    if kind == "gg":
        obj = gabber_galil(args.m)
    elif kind == "circulant":
        obj = circulant(args.n, _closed_conn(args.n, args.conn))
    elif kind == "complete":
        obj = complete_graph(args.n)
    elif kind == "power":
        G, inputs = load_graph(args.graph)
        obj = power(_need(G, RegularGraph, "power"), args.k)
    elif kind == "strip":
        G, inputs = load_graph(args.graph)
        obj, deficit = strip_loops(_need(G, RegularGraph, "strip"))
        log.info("loop deficits: %s", deficit)
    elif kind == "incidence":
        G, inputs = load_graph(args.graph)
        G = _need(G, RegularGraph, "incidence")
        if args.strip_loops:
            G, _ = strip_loops(G)
        obj = edge_vertex_incidence(G)
    elif kind == "inner":
        spec = InnerSearchSpec(args.left, args.degree, args.right, args.delta, args.alpha,
                               seed=args.seed, max_attempts=args.max_attempts)
        res = search_inner(spec, args.budget, args.workers)
        obj = res.graph
        cert = render("inner certificate", [
            f"attempt: {res.attempt}", f"status: {res.verdict.status}"],
            {"spec": spec.as_dict(), "attempt": res.attempt,
             "certificate": res.verdict.as_dict()})
        if args.out:
            write_with_manifest(str(args.out) + ".cert", cert, "build inner",
                                _params_echo(args), args.seed, inputs)
    elif kind == "product":
        outer, i1 = load_graph(args.outer)
        inner, i2 = load_graph(args.inner)
        inputs = {**i1, **i2}
        obj = routed_product(_need(outer, BipartiteGraph, "product"),
                             _need(inner, BipartiteGraph, "product"),
                             allow_irregular=args.allow_irregular)
    elif kind in ("pipeline-spectral", "pipeline-comb"):
        return _build_pipeline(args)
    else:
        raise UsageError(f"unknown build kind {kind!r}")
    text = serialize(obj)
    if args.out:
        write_with_manifest(args.out, text, f"build {kind}", _params_echo(args),
                            getattr(args, "seed", None), inputs)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _closed_conn(n: int, conn) -> list[int]:
    """Close a connection set under s -> n - s so ``--conn 1`` means the cycle."""
    return sorted({s % n for s in conn} | {(n - s) % n for s in conn})


def _config(args, **extra) -> PipelineConfig:
    return PipelineConfig(
        base=getattr(args, "base", "complete"), n=getattr(args, "n", 4),
        conn=tuple(_closed_conn(args.n, args.conn)), m=getattr(args, "m", 3),
        power=getattr(args, "power", 1), inner_delta=getattr(args, "inner_delta", 1),
        inner_alpha=args.inner_alpha, inner_degree=args.inner_degree,
        inner_right=args.inner_right, gammas=tuple(getattr(args, "gammas", ()) or ()),
        gamma=getattr(args, "gamma", Fraction(1, 2)), epsilon=args.epsilon,
        n0_inner=args.n0_inner, seed=args.seed, budget=args.budget,
        samples_per_class=args.samples, exhaustive_max_size=args.exhaustive_max_size,
        inner_max_attempts=args.max_attempts, **extra)


def render_dossier(d) -> str:
    lines = [f"pipeline: {d.pipeline}"]
    for section in ("base", "outer", "product"):
        info = getattr(d, section)
        if info:
            flat = {k: v for k, v in info.items() if not isinstance(v, (dict, list))}
            lines.append(f"{section}: " + ", ".join(f"{k}={v}" for k, v in flat.items()))
    if d.inner:
        lines.append(f"inner: attempt={d.inner['attempt']} graph={d.inner['graph']} "
                     f"certificate={d.inner['certificate']['status']}")
    lines.append("")
    lines.append("parameters:")
    lines += [f"  {k}: {fmt_num(v) if isinstance(v, float) else v}"
              for k, v in d.parameters.items()]
    lines.append("")
    rows = [[c.name, c.source, fmt_num(c.delta),
             "-" if c.alpha is None else fmt_num(c.alpha),
             "yes" if c.asserted else "no",
             "-" if c.verdict is None else c.verdict.status,
             "ok" if c.ok else "REFUTED"] for c in d.claims]
    lines += table(rows, ["claim", "source", "delta", "alpha", "asserted", "verified", "result"])
    for w in d.warnings:
        lines.append(f"warning: {w}")
    return render("dossier", lines, d.as_dict())


def _build_pipeline(args) -> int:
    inputs = {}
    inner = None
    if args.inner_file:
        inner, i2 = load_graph(args.inner_file)
        inputs.update(i2)
        _need(inner, BipartiteGraph, "inner")
    if args.kind == "pipeline-spectral":
        base = None
        if args.base_file:
            base, i1 = load_graph(args.base_file)
            inputs.update(i1)
            _need(base, RegularGraph, "base")
        cfg = _config(args)
        H, dossier = pipeline_spectral(cfg, base=base, inner=inner, workers=args.workers)
    else:
        outer, i1 = load_graph(args.outer)
        inputs.update(i1)
        outer = _need(outer, BipartiteGraph, "pipeline-comb")
        premise = check_combinatorial(outer, ExpansionParams(args.delta, args.alpha),
                                      args.budget, args.seed, workers=args.workers)
        if not premise.certified:
            raise UsageError(f"outer graph is not certified ({premise.status}) at "
                             f"delta={fmt_num(args.delta)}, alpha={fmt_num(args.alpha)}")
        cfg = _config(args)
        H, dossier = pipeline_comb(outer, cfg, premise, inner=inner, workers=args.workers)
    text = render_dossier(dossier)
    _emit(args, text, inputs, f"build {args.kind}")
    if args.graph_out:
        write_with_manifest(args.graph_out, serialize(H), f"build {args.kind}",
                            _params_echo(args), args.seed, inputs)
    return EXIT_OK if dossier.ok else EXIT_REFUTED


# verify

def cmd_verify(args) -> int:
    G, inputs = load_graph(args.graph)
    prop = args.property
    kw = dict(budget=args.budget, seed=args.seed, workers=args.workers,
              exhaustive_max_size=args.exhaustive_max_size, samples_per_class=args.samples)
    if prop in ("comb", "un", "un-fraction"):
        B = _need(G, BipartiteGraph, prop)
        _require(args, "delta")
        if prop == "un":
            v = check_un(B, args.delta, ref_degree=args.ref_degree, **kw)
        else:
            _require(args, "alpha")
            p = ExpansionParams(args.delta, args.alpha)
            fn = check_combinatorial if prop == "comb" else check_un_fraction
            v = fn(B, p, ref_degree=args.ref_degree, **kw)
        lines = [f"property: {prop}", f"status: {v.status}",
                 f"delta: {fmt_num(v.delta)}  alpha: {fmt_num(v.alpha) if v.alpha is not None else '-'}"
                 f"  ref_degree: {v.ref_degree}",
                 f"enumerated: {v.enumerated}  sampled: {v.sampled}  "
                 f"max_size_exhausted: {v.max_size_exhausted}/{v.max_eligible_size}"]
        if v.witness is not None:
            lines.append(f"witness: {list(v.witness)} (value {v.witness_value}, "
                         f"required {v.witness_required})")
        _emit(args, render(f"verify {prop}", lines, v.as_dict()), inputs, f"verify {prop}")
        return EXIT_REFUTED if v.refuted else EXIT_OK

    if prop == "fact1":
        B = _need(G, BipartiteGraph, prop)
        _require(args, "delta")
        _require(args, "epsilon")
        rep = check_fact1(B, args.delta, args.epsilon, args.budget, args.seed,
                          workers=args.workers)
        lines = [f"premise (comb): {rep.premise.status}",
                 f"conclusion (un-fraction): "
                 f"{rep.conclusion.status if rep.conclusion else 'not run'}",
                 f"implication holds: {rep.holds}"]
        _emit(args, render("verify fact1", lines, rep.as_dict()), inputs, "verify fact1")
        return EXIT_OK if rep.holds else EXIT_REFUTED

    if prop == "mixing":
        R = _need(G, RegularGraph, prop)
        lam = float(args.lam) if args.lam is not None else lambda_of(R).lam
        audit = mixing_audit(R, lam, args.pairs, args.count, args.seed, args.workers)
        ok = audit.max_violation <= MIXING_TOL
        lines = [f"lambda: {lam:.12g}", f"pairs: {audit.pairs_checked} ({audit.mode})",
                 f"max violation: {audit.max_violation:.12g}",
                 f"worst pair: S={list(audit.worst_pair[0])} T={list(audit.worst_pair[1])}",
                 f"status: {'pass' if ok else 'refuted'}"]
        _emit(args, render("verify mixing", lines, {**audit.as_dict(), "ok": ok}), inputs,
              "verify mixing")
        return EXIT_OK if ok else EXIT_REFUTED

    if prop in ("lemma32", "lemma35"):
        R = _need(G, RegularGraph, prop)
        _require(args, "delta")
        gamma = args.gamma if prop == "lemma35" else 1
        if prop == "lemma35":
            _require(args, "gamma")
        lam = float(args.lam) if args.lam is not None else None
        rep = lemma_fraction_size_check(R, args.delta, gamma, args.mode, lam, args.count,
                                        args.seed)
    elif prop in ("lemma42", "lemma44"):
        B = _need(G, BipartiteGraph, prop)
        _require(args, "delta")
        _require(args, "alpha")
        gamma = args.gamma if prop == "lemma44" else 1
        if prop == "lemma44":
            _require(args, "gamma")
        rep = lemma_comb_size_check(B, args.delta, args.alpha, gamma, args.mode,
                                    budget=args.budget, count=args.count, seed=args.seed,
                                    workers=args.workers)
    else:
        raise UsageError(f"unknown property {prop!r}")
    lines = [f"lemma: {rep.lemma}", f"subsets checked: {rep.checked}",
             f"hypothesis holds: {rep.hypothesis_holds}", f"violations: {rep.violations}",
             f"bound: {rep.bound:.12g}"]
    if rep.witness is not None:
        lines.append(f"witness: {list(rep.witness)}")
    _emit(args, render(f"verify {prop}", lines, rep.as_dict()), inputs, f"verify {prop}")
    return EXIT_OK if rep.ok else EXIT_REFUTED


def _require(args, name):
    if getattr(args, name, None) is None:
        raise UsageError(f"--{name.replace('_', '-')} is required for {args.property}")


# code

def cmd_code(args) -> int:
    action = args.action
    inputs: dict = {}
    if action in ("ss1", "ss2"):
        G, inputs = load_graph(args.source)
        B = _need(G, BipartiteGraph, action)
        if action == "ss1":
            H = ss1_matrix(B)
        else:
            if not args.local:
                raise UsageError("ss2 needs --local LOCAL.alist")
            H0, i2 = load_matrix(args.local)
            inputs.update(i2)
            H = ss2_matrix(B, H0)
        text = export_alist(H)
        if args.out:
            write_with_manifest(args.out, text, f"code {action}", _params_echo(args), None,
                                inputs)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    if action == "alist":
        H, inputs = load_matrix(args.source)
        sys.stdout.write(export_alist(H))
        return EXIT_OK
    if action == "distance":
        H, inputs = load_matrix(args.source)
        dist = min_distance_exhaustive(H, args.dim_guard)
        shown = "inf" if dist == float("inf") else str(dist)
        data = {"distance": shown if dist == float("inf") else dist, "rank": gf2_rank(H), "dimension": code_dimension(H),
                "rows": H.rows, "cols": H.cols, "hex_rows": H.hex_rows()}
        lines = [f"rows: {H.rows}  cols: {H.cols}  rank: {data['rank']}  "
                 f"dimension: {data['dimension']}", f"minimum distance: {shown}"]
        _emit(args, render("code distance", lines, data), inputs, "code distance")
        return EXIT_OK
    if action == "lb":
        G, inputs = load_graph(args.source)
        B = _need(G, BipartiteGraph, "lb")
        if args.delta is None:
            raise UsageError("lb needs --delta")
        v = check_un(B, args.delta, args.budget, args.seed, workers=args.workers)
        if not v.certified:
            lines = [f"UN verdict: {v.status}; no certified bound"]
            _emit(args, render("code lb", lines, {"verdict": v.as_dict(), "bound": None}),
                  inputs, "code lb")
            return EXIT_REFUTED if v.refuted else EXIT_FAILED
        bound = distance_lb_from_un(v, B)
        lines = [f"UN verdict: {v.status}", f"distance lower bound: {bound}"]
        _emit(args, render("code lb", lines, {"verdict": v.as_dict(), "bound": bound}),
              inputs, "code lb")
        return EXIT_OK
    if action == "equiv":
        if not (args.outer and args.inner):
            raise UsageError("equiv needs --outer and --inner")
        outer, i1 = load_graph(args.outer)
        inner, i2 = load_graph(args.inner)
        inputs = {**i1, **i2}
        res = routed_ss2_equivalence(_need(outer, BipartiteGraph, "equiv"),
                                     _need(inner, BipartiteGraph, "equiv"))
        lines = [f"equal: {res.equal}", f"ranks: product={res.rank_product} "
                 f"ss2={res.rank_ss2} joint={res.rank_joint}"]
        if res.separating is not None:
            lines.append(f"separating vector: {res.separating.tolist()}")
        _emit(args, render("code equiv", lines, res.as_dict()), inputs, "code equiv")
        return EXIT_OK if res.equal else EXIT_REFUTED
    raise UsageError(f"unknown code action {action!r}")


# parser

def _common(p, seed=True):
    if seed:
        p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=env_int("UNEXPAND_BUDGET", DEFAULT_BUDGET))
    p.add_argument("--samples", type=int, default=env_int("UNEXPAND_SAMPLES", DEFAULT_SAMPLES),
                   help="samples per size class once the budget is spent")
    p.add_argument("--exhaustive-max-size", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unexpand", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"unexpand {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="construct graphs, inner graphs, products, pipelines")
    b.add_argument("kind", choices=["gg", "circulant", "complete", "power", "strip", "incidence",
                                    "inner", "product", "pipeline-spectral", "pipeline-comb"])
    b.add_argument("--out")
    b.add_argument("--graph-out", help="pipelines: also write the composed graph here")
    b.add_argument("--m", type=int, default=3)
    b.add_argument("--n", type=int, default=4)
    b.add_argument("--conn", type=int_list, default=[])
    b.add_argument("--k", type=int, default=2)
    b.add_argument("--graph")
    b.add_argument("--strip-loops", action="store_true")
    b.add_argument("--left", type=int)
    b.add_argument("--right", type=int)
    b.add_argument("--degree", type=int)
    b.add_argument("--delta", type=frac)
    b.add_argument("--alpha", type=frac)
    b.add_argument("--max-attempts", type=int, default=10_000)
    b.add_argument("--outer")
    b.add_argument("--inner")
    b.add_argument("--allow-irregular", action="store_true")
    b.add_argument("--base", choices=["complete", "circulant", "gabber_galil"], default="complete")
    b.add_argument("--base-file")
    b.add_argument("--power", type=int, default=1)
    b.add_argument("--inner-file")
    b.add_argument("--inner-delta", type=frac, default=Fraction(1))
    b.add_argument("--inner-alpha", type=frac)
    b.add_argument("--inner-degree", type=int, default=1)
    b.add_argument("--inner-right", type=int)
    b.add_argument("--gammas", type=frac_list, default=[Fraction(1, 2)])
    b.add_argument("--gamma", type=frac, default=Fraction(1, 2))
    b.add_argument("--epsilon", type=frac)
    b.add_argument("--n0-inner", type=int)
    _common(b)
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="certify or refute an expansion property")
    v.add_argument("property", choices=["comb", "un", "un-fraction", "mixing", "lemma32",
                                        "lemma35", "lemma42", "lemma44", "fact1"])
    v.add_argument("graph", help="graph document path or fixture:NAME")
    v.add_argument("--delta", type=frac)
    v.add_argument("--alpha", type=frac)
    v.add_argument("--gamma", type=frac)
    v.add_argument("--epsilon", type=frac)
    v.add_argument("--lambda", dest="lam", type=frac)
    v.add_argument("--ref-degree", type=int)
    v.add_argument("--pairs", choices=["exhaustive", "sampled"], default="exhaustive")
    v.add_argument("--mode", choices=["exhaustive", "sampled"], default="exhaustive")
    v.add_argument("--count", type=int, default=DEFAULT_SAMPLES)
    v.add_argument("--report")
    _common(v)
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("code", help="parity-check matrices, distances, equivalence")
    c.add_argument("action", choices=["ss1", "ss2", "distance", "lb", "equiv", "alist"])
    c.add_argument("source", nargs="?", help="graph document / alist file")
    c.add_argument("--local", help="ss2: local code parity-check matrix (alist)")
    c.add_argument("--outer")
    c.add_argument("--inner")
    c.add_argument("--delta", type=frac)
    c.add_argument("--dim-guard", type=int, default=24)
    c.add_argument("--out")
    _common(c)
    c.set_defaults(func=cmd_code)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, GraphError, AlistError, ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SearchExhausted, InsufficientBudget, ConvergenceError) as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
