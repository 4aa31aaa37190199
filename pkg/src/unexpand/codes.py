"""Parity-check matrices of expander codes and GF(2) linear algebra.

Rows are kept as Python ints for elimination (bit j = column j) and as a
dense uint8 array for export.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import BipartiteGraph, GraphError
from .util import as_fraction
from .verify import ExpansionVerdict, graph_digest

DIM_GUARD = 24


@dataclass(frozen=True, eq=False)
class ParityCheckMatrix:
    bits: np.ndarray

    def __post_init__(self):
        b = np.array(self.bits, dtype=np.uint8) & 1
        if b.ndim != 2:
            raise ValueError("parity-check matrix must be 2-D")
        b.flags.writeable = False
        object.__setattr__(self, "bits", b)

    @property
    def rows(self) -> int:
        return self.bits.shape[0]

    @property
    def cols(self) -> int:
        return self.bits.shape[1]

    @property
    def packed_rows(self) -> list[int]:
        weights = [1 << j for j in range(self.cols)]
        return [sum(w for w, b in zip(weights, row) if b) for row in self.bits.tolist()]

    def hex_rows(self) -> list[str]:
        width = max(1, (self.cols + 3) // 4)
        return [format(r, f"0{width}x") for r in self.packed_rows]

    def __eq__(self, other):
        if not isinstance(other, ParityCheckMatrix):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.bits.shape, self.bits.tobytes()))

    def __repr__(self):
        return f"ParityCheckMatrix({self.rows}x{self.cols})"


def _as_matrix(H) -> ParityCheckMatrix:
    return H if isinstance(H, ParityCheckMatrix) else ParityCheckMatrix(np.asarray(H))


def ss1_matrix(B: BipartiteGraph) -> ParityCheckMatrix:
    """Check v constrains the parity of its neighbors; parallel edges cancel mod 2."""
    return ParityCheckMatrix((B.matrix.T % 2).astype(np.uint8))


def ss2_matrix(B: BipartiteGraph, H0) -> ParityCheckMatrix:
    """Row (v, j) places row j of the local code's checks on v's ordered slots."""
    H0 = _as_matrix(H0)
    if not B.is_biregular:
        raise GraphError("SS2 needs a biregular graph")
    if H0.cols != B.d_right:
        raise ValueError(f"local code length {H0.cols} != right degree {B.d_right}")
    out = np.zeros((B.n_right * H0.rows, B.n_left), dtype=np.uint8)
    for v, slots in enumerate(B.right_order):
        for j in range(H0.rows):
            row = out[v * H0.rows + j]
            for i, u in enumerate(slots):
                if H0.bits[j, i]:
                    row[u] ^= 1
    return ParityCheckMatrix(out)


def parity_code_matrix(n: int) -> ParityCheckMatrix:
    return ParityCheckMatrix(np.ones((1, n), dtype=np.uint8))


# GF(2) elimination on int rows

def _rref(rows: list[int], ncols: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form; returns (rows, pivot columns)."""
    work = [r for r in rows if r]
    pivots = []
    r = 0
    for col in range(ncols):
        bit = 1 << col
        piv = next((i for i in range(r, len(work)) if work[i] & bit), None)
        if piv is None:
            continue
        work[r], work[piv] = work[piv], work[r]
        for i in range(len(work)):
            if i != r and work[i] & bit:
                work[i] ^= work[r]
        pivots.append(col)
        r += 1
        if r == len(work):
            break
    return work[:r], pivots


def gf2_rank(H) -> int:
    H = _as_matrix(H)
    return len(_rref(H.packed_rows, H.cols)[1])


def _nullspace_ints(H: ParityCheckMatrix) -> list[int]:
    rows, pivots = _rref(H.packed_rows, H.cols)
    pivot_set = set(pivots)
    basis = []
    for f in range(H.cols):
        if f in pivot_set:
            continue
        x = 1 << f
        for row, p in zip(rows, pivots):
            if (row >> f) & 1:
                x |= 1 << p
        basis.append(x)
    return basis


def _to_bits(x: int, n: int) -> np.ndarray:
    return np.array([(x >> j) & 1 for j in range(n)], dtype=np.uint8)


def nullspace_basis(H) -> list[np.ndarray]:
    """One basis vector per free column (identity on the free coordinates)."""
    H = _as_matrix(H)
    return [_to_bits(x, H.cols) for x in _nullspace_ints(H)]


def code_dimension(H) -> int:
    H = _as_matrix(H)
    return H.cols - gf2_rank(H)


def syndrome(H, x) -> np.ndarray:
    H = _as_matrix(H)
    return (H.bits.astype(np.int64) @ np.asarray(x, dtype=np.int64)) % 2


def _pack_words(vectors: list[int], n: int) -> np.ndarray:
    words = max(1, (n + 63) // 64)
    mask = (1 << 64) - 1
    return np.array([[(x >> (64 * w)) & mask for w in range(words)] for x in vectors],
                    dtype=np.uint64).reshape(len(vectors), words)


def _span_table(basis: np.ndarray) -> np.ndarray:
    """All 2**k XOR combinations of the k rows, index bit i <-> row i."""
    k, w = basis.shape
    table = np.zeros((1 << k, w), dtype=np.uint64)
    for i in range(k):
        table[1 << i: 1 << (i + 1)] = table[: 1 << i] ^ basis[i]
    return table


def min_distance_exhaustive(H, dim_guard: int = DIM_GUARD):
    """Minimum weight of a nonzero codeword; ``math.inf`` for the zero code."""
    H = _as_matrix(H)
    basis = _nullspace_ints(H)
    k = len(basis)
    if k > dim_guard:
        raise ValueError(f"code dimension {k} exceeds the guard {dim_guard}")
    if k == 0:
        return math.inf
    packed = _pack_words(basis, H.cols)
    lo_k = k // 2
    low = _span_table(packed[:lo_k])
    high = _span_table(packed[lo_k:])
    low_w = np.bitwise_count(low).sum(axis=1)
    best = math.inf
    for h in range(high.shape[0]):
        weights = np.bitwise_count(low ^ high[h]).sum(axis=1) if h else low_w
        if h == 0:
            weights = weights[1:]
        if weights.size:
            best = min(best, int(weights.min()))
    return best


def distance_lb_from_un(verdict: ExpansionVerdict, B: BipartiteGraph) -> int:
    """Lower bound ceil(delta * n_left) on the SS1 distance from a UN certificate.

    A nonzero word of weight below delta*n_left has a unique-neighbor check
    that sees exactly one of its ones, so it cannot be a codeword.
    """
    if verdict.status != "certified":
        raise ValueError(f"verdict is {verdict.status}, not certified")
    if verdict.prop == "un-fraction":
        if not as_fraction(verdict.alpha) > 0:
            raise ValueError("fraction certificate with alpha = 0 gives no unique neighbor")
    elif verdict.prop != "un":
        raise ValueError(f"need a unique-neighbor certificate, got {verdict.prop!r}")
    if not B.is_simple:
        raise GraphError("parallel edges void the unique-neighbor distance argument")
    if verdict.graph and verdict.graph != graph_digest(B):
        raise ValueError("certificate was issued for a different graph")
    return math.ceil(as_fraction(verdict.delta) * B.n_left)


@dataclass(frozen=True)
class EquivalenceResult:
    equal: bool
    rank_product: int
    rank_ss2: int
    rank_joint: int
    separating: np.ndarray | None = None

    def as_dict(self) -> dict:
        return {
            "equal": self.equal,
            "rank_product": self.rank_product,
            "rank_ss2": self.rank_ss2,
            "rank_joint": self.rank_joint,
            "separating": None if self.separating is None else self.separating.tolist(),
        }


def same_code(H1, H2) -> EquivalenceResult:
    """Equal null spaces iff equal row spaces iff all three ranks agree."""
    H1, H2 = _as_matrix(H1), _as_matrix(H2)
    if H1.cols != H2.cols:
        raise ValueError("codes have different lengths")
    r1, r2 = gf2_rank(H1), gf2_rank(H2)
    rj = gf2_rank(np.vstack([H1.bits, H2.bits]))
    if r1 == r2 == rj:
        return EquivalenceResult(True, r1, r2, rj)
    sep = None
    for A, Bm in ((H1, H2), (H2, H1)):
        for x in nullspace_basis(A):
            if syndrome(Bm, x).any():
                sep = x
                break
        if sep is not None:
            break
    return EquivalenceResult(False, r1, r2, rj, sep)


def routed_ss2_equivalence(outer: BipartiteGraph, inner: BipartiteGraph) -> EquivalenceResult:
    """SS1 code of the routed product vs. SS2 code of the outer graph with the
    inner graph's SS1 code as local code."""
    from .compose import routed_product

    H1 = ss1_matrix(routed_product(outer, inner))
    H2 = ss2_matrix(outer, ss1_matrix(inner))
    return same_code(H1, H2)


# alist interchange

def export_alist(H) -> str:
    H = _as_matrix(H)
    col_idx = [list(np.flatnonzero(H.bits[:, j]) + 1) for j in range(H.cols)]
    row_idx = [list(np.flatnonzero(H.bits[i]) + 1) for i in range(H.rows)]
    max_c = max((len(c) for c in col_idx), default=0)
    max_r = max((len(r) for r in row_idx), default=0)
    lines = [f"{H.cols} {H.rows}", f"{max_c} {max_r}",
             " ".join(str(len(c)) for c in col_idx),
             " ".join(str(len(r)) for r in row_idx)]
    lines += [" ".join(str(int(x)) for x in c + [0] * (max_c - len(c))) for c in col_idx]
    lines += [" ".join(str(int(x)) for x in r + [0] * (max_r - len(r))) for r in row_idx]
    return "\n".join(lines) + "\n"


class AlistError(ValueError):
    pass


def import_alist(text: str) -> ParityCheckMatrix:
    tokens = text.split()
    try:
        vals = [int(t) for t in tokens]
    except ValueError as exc:
        raise AlistError(f"non-integer token: {exc}") from exc
    pos = 0

    def take(k):
        nonlocal pos
        if pos + k > len(vals):
            raise AlistError("truncated alist document")
        out = vals[pos:pos + k]
        pos += k
        return out

    n, m = take(2)
    max_c, max_r = take(2)
    col_deg = take(n)
    row_deg = take(m)
    bits = np.zeros((m, n), dtype=np.uint8)
    for j in range(n):
        entries = take(max_c)
        for i in entries[:col_deg[j]]:
            if not (1 <= i <= m):
                raise AlistError(f"row index {i} out of range in column {j + 1}")
            bits[i - 1, j] = 1
    check = np.zeros((m, n), dtype=np.uint8)
    for i in range(m):
        entries = take(max_r)
        for j in entries[:row_deg[i]]:
            if not (1 <= j <= n):
                raise AlistError(f"column index {j} out of range in row {i + 1}")
            check[i, j - 1] = 1
    if not np.array_equal(bits, check):
        raise AlistError("column and row lists disagree")
    if pos != len(vals):
        raise AlistError("trailing tokens")
    return ParityCheckMatrix(bits)
