#!/usr/bin/env python3
"""Build dossiers for both pipelines on the desk-scale bases.

Each dossier lists the measured spectral ratio, the certified inner graph
and every claimed expansion pair beside the verifier's verdict.
"""

import argparse
from fractions import Fraction as F
from pathlib import Path

from unexpand.cli import render_dossier
from unexpand.compose import PipelineConfig, pipeline_comb, pipeline_spectral
from unexpand.fixtures import by_name
from unexpand.graphs import edge_vertex_incidence, serialize
from unexpand.report import write_with_manifest
from unexpand.verify import ExpansionParams, check_combinatorial

SPECTRAL = {
    "K4": dict(base="complete", n=4),
    "circ8": dict(base="circulant", n=8, conn=(1, 4, 7)),
    "gg3": dict(base="gabber_galil", m=3),
}
COMB = [("K4", F(1, 2), F(3, 4)), ("K33", F(1, 3), F(3, 4)), ("K5", F(1, 4), F(3, 4))]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--outdir", default="dossiers")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    common = dict(seed=args.seed, samples_per_class=args.samples, exhaustive_max_size=4,
                  inner_max_attempts=5000)

    for name, base in SPECTRAL.items():
        d = by_name(name).degree
        cfg = PipelineConfig(**base, inner_delta=F(1), inner_alpha=F(1, 2), inner_degree=2,
                             inner_right=2 * d, gammas=(F(1, 4), F(1, 2)), **common)
        H, dossier = pipeline_spectral(cfg, workers=args.workers)
        _write(out / f"spectral_{name}", dossier, H, cfg)

    for name, delta, alpha in COMB:
        outer = edge_vertex_incidence(by_name(name))
        premise = check_combinatorial(outer, ExpansionParams(delta, alpha))
        cfg = PipelineConfig(gamma=F(1, 2), inner_alpha=F(1, 2), inner_degree=2,
                             inner_right=2 * outer.d_right, **common)
        H, dossier = pipeline_comb(outer, cfg, premise, workers=args.workers)
        _write(out / f"comb_{name}", dossier, H, cfg)


def _write(stem, dossier, H, cfg):
    text = render_dossier(dossier)
    write_with_manifest(f"{stem}.txt", text, "pipeline_dossiers", cfg.echo(), cfg.seed, {})
    write_with_manifest(f"{stem}.graph", serialize(H), "pipeline_dossiers", cfg.echo(),
                        cfg.seed, {})
    status = "ok" if dossier.ok else "REFUTED"
    print(f"{stem.name}: {len(dossier.claims)} claims, {status}")


if __name__ == "__main__":
    main()
