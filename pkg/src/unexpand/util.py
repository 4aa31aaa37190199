"""Shared numeric helpers: exact thresholds and the seeded generator."""

from __future__ import annotations

import math
import zlib
from fractions import Fraction
from numbers import Rational

import numpy as np

RNG_NAME = "pcg64-seedseq-v1"



def as_fraction(x, max_den: int = 10**9) -> Fraction:
    """Exact value of ``x``; floats within 1e-15 of a small-denominator
    rational snap to it (so ``1/3`` compares exactly against counts)."""
    if isinstance(x, Rational):
        return Fraction(x)
    exact = Fraction(float(x))
    snapped = exact.limit_denominator(max_den)
    if abs(float(snapped) - float(x)) <= 1e-15 * max(1.0, abs(float(x))):
        return snapped
    return exact


def ceil_frac(x) -> int:
    return math.ceil(as_fraction(x))


def max_eligible_size(delta, n: int) -> int:
    """Largest k with k < delta * n (strict), 0 if none."""
    bound = as_fraction(delta) * n
    k = math.ceil(bound) - 1
    return max(0, min(k, n))


def make_rng(seed: int, *labels: str) -> np.random.Generator:
    """Deterministic child stream for ``seed`` keyed by a label path.

    Labels are hashed with crc32 so the stream does not depend on
    process hash randomization.
    """
    key = tuple(zlib.crc32(lab.encode()) for lab in labels)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))


def fmt_num(x) -> str:
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else str(x.numerator)
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)
