"""Explicit regular families, graph powers, eigenvalues and mixing audits."""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .graphs import GraphError, RegularGraph
from .util import make_rng

EXACT_GUARD = 4096
MIXING_GUARD = 14
JACOBI_AUTO_LIMIT = 64


class ConvergenceError(RuntimeError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# constructions

def gabber_galil(m: int) -> RegularGraph:
    """8-regular multigraph on Z_m x Z_m; vertex (x, y) has index x*m + y.

    Uses the maps (x+y, y), (x+y+1, y), (x, y+x), (x, y+x+1) and their
    inverses. Fixed points become loops, coincidences become parallel edges.
    """
    if m < 2:
        raise ValueError("gabber_galil needs m >= 2")
    n = m * m
    adj = np.zeros((n, n), dtype=np.int64)
    x, y = np.divmod(np.arange(n), m)
    images = [
        ((x + y) % m, y),
        ((x + y + 1) % m, y),
        (x, (y + x) % m),
        (x, (y + x + 1) % m),
    ]
    src = np.arange(n)
    for fx, fy in images:
        dst = fx * m + fy
        # forward map plus its inverse: A[v, f(v)] and A[f(v), v]
        np.add.at(adj, (src, dst), 1)
        np.add.at(adj, (dst, src), 1)
    return RegularGraph(adj, d=8)


def _check_conn(n: int, conn) -> list[int]:
    conn = sorted(set(int(s) for s in conn))
    if any(s % n == 0 for s in conn):
        raise ValueError("connection set must not contain 0 (mod n)")
    if any(not (0 < s < n) for s in conn):
        raise ValueError(f"connection set must lie in 1..{n - 1}")
    if set(conn) != {(n - s) % n for s in conn}:
        raise ValueError("connection set must be closed under s -> n - s")
    return conn


def circulant(n: int, conn) -> RegularGraph:
    conn = _check_conn(n, conn)
    adj = np.zeros((n, n), dtype=np.int64)
    u = np.arange(n)
    for s in conn:
        adj[u, (u + s) % n] += 1
    return RegularGraph(adj, d=len(conn))


def circulant_spectrum_analytic(n: int, conn) -> np.ndarray:
    """Eigenvalues ``sum_s cos(2 pi j s / n)`` for j = 0..n-1 (character sums)."""
    conn = np.array(_check_conn(n, conn), dtype=float)
    j = np.arange(n, dtype=float)[:, None]
    return np.cos(2 * np.pi * j * conn[None, :] / n).sum(axis=1)


def complete_graph(n: int) -> RegularGraph:
    return circulant(n, range(1, n))


def power(G: RegularGraph, k: int) -> RegularGraph:
    if k < 1:
        raise ValueError("power needs k >= 1")
    d = G.degree
    adj = np.linalg.matrix_power(G.adj, k)
    return RegularGraph(adj, d=d ** k)


# structure

def components(G: RegularGraph) -> int:
    n = G.n
    seen = np.zeros(n, dtype=bool)
    count = 0
    for s in range(n):
        if seen[s]:
            continue
        count += 1
        seen[s] = True
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in np.flatnonzero(G.adj[u]):
                if not seen[w]:
                    seen[w] = True
                    queue.append(w)
    return count


def two_coloring(G: RegularGraph) -> np.ndarray | None:
    """Proper 2-coloring as a +-1 vector, or None if G is not bipartite."""
    n = G.n
    color = np.zeros(n, dtype=np.int64)
    for s in range(n):
        if color[s]:
            continue
        color[s] = 1
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in np.flatnonzero(G.adj[u]):
                if color[w] == 0:
                    color[w] = -color[u]
                    queue.append(w)
                elif color[w] == color[u]:
                    return None
    return color


# eigensolvers

def _off_norm(A: np.ndarray) -> float:
    off = A - np.diag(np.diag(A))
    return float(np.sqrt((off * off).sum()))


def jacobi_eigenvalues(a, tol: float = 1e-10, max_sweeps: int = 100):
    """Cyclic Jacobi rotations on a symmetric matrix.

    Returns ``(eigenvalues descending, off_norm)``. By Weyl's inequality
    every eigenvalue lies within ``off_norm`` (Frobenius norm of what is
    left off the diagonal) of a returned value.
    """
    A = np.array(a, dtype=float)
    n = A.shape[0]
    scale = max(1.0, float(np.abs(A).max()) if n else 1.0)
    for _ in range(max_sweeps):
        off = _off_norm(A)
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                colp = A[:, p].copy()
                colq = A[:, q]
                A[:, p] = c * colp - s * colq
                A[:, q] = s * colp + c * colq
                rowp = A[p, :].copy()
                rowq = A[q, :]
                A[p, :] = c * rowp - s * rowq
                A[q, :] = s * rowp + c * rowq
                A[p, q] = A[q, p] = 0.0
    else:
        raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
    off = _off_norm(A)
    return np.sort(np.diag(A))[::-1], off


def eigenvalues(G: RegularGraph, solver: str = "auto", tol: float = 1e-10):
    """Full spectrum (descending) and a residual bound."""
    n = G.n
    if n > EXACT_GUARD:
        raise ValueError(f"exact eigensolve guarded at n <= {EXACT_GUARD}, got {n}")
    if solver == "auto":
        solver = "jacobi" if n <= JACOBI_AUTO_LIMIT else "lapack"
    if solver == "jacobi":
        vals, res = jacobi_eigenvalues(G.adj, tol=tol)
        return vals, res, solver
    if solver == "lapack":
        A = G.adj.astype(float)
        vals, vecs = np.linalg.eigh(A)
        res = float(np.linalg.norm(A @ vecs - vecs * vals, axis=0).max()) if n else 0.0
        return vals[::-1].copy(), res, solver
    raise ValueError(f"unknown solver {solver!r}")


@dataclass(frozen=True)
class SpectrumReport:
    lam: float
    d: int
    method: str
    residual: float
    bipartite: bool
    certified: bool
    solver: str = ""
    iterations: int = 0
    eigenvalues: tuple[float, ...] = field(default=(), repr=False)

    @property
    def ratio(self) -> float:
        return self.lam / self.d

    def as_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "d": self.d,
            "lambda_over_d": self.ratio,
            "method": self.method,
            "solver": self.solver,
            "residual": self.residual,
            "bipartite": self.bipartite,
            "certified": self.certified,
            "iterations": self.iterations,
            "eigenvalues": [float(f"{x:.12g}") for x in self.eigenvalues],
        }


def nontrivial(vals, d: int, bipartite: bool) -> np.ndarray:
    """Drop one copy of +d, and one of -d when bipartite."""
    rest = list(vals)
    rest.pop(int(np.argmin([abs(x - d) for x in rest])))
    if bipartite and rest:
        rest.pop(int(np.argmin([abs(x + d) for x in rest])))
    return np.array(rest, dtype=float)


def lambda_of(G: RegularGraph, mode: str = "exact", tol: float = 1e-10,
              max_iter: int = 100_000, seed: int = 0, solver: str = "auto") -> SpectrumReport:
    """Second-largest absolute eigenvalue excluding the trivial ones."""
    if not G.is_regular:
        raise GraphError("lambda_of needs a regular graph")
    d = G.degree
    if components(G) != 1:
        raise GraphError("graph is disconnected; trivial eigenvalue d is repeated")
    coloring = two_coloring(G)
    bip = coloring is not None

    if mode == "exact":
        vals, res, used = eigenvalues(G, solver=solver, tol=tol)
        rest = nontrivial(vals, d, bip)
        lam = float(np.abs(rest).max()) if rest.size else 0.0
        return SpectrumReport(min(lam, float(d)), d, "exact", res, bip, True, used, 0,
                              tuple(float(x) for x in vals))

    if mode == "power":
        return _power_iteration(G, d, coloring, tol, max_iter, seed)
    raise ValueError(f"unknown mode {mode!r}")


def _power_iteration(G, d, coloring, tol, max_iter, seed):
    """Power iteration on A^2 restricted to the nontrivial subspace.

    The estimate sqrt(x' A^2 x) of a unit vector x never exceeds the exact
    nontrivial lambda, whatever the convergence state.
    """
    n = G.n
    A = G.adj.astype(float)
    basis = [np.ones(n) / math.sqrt(n)]
    if coloring is not None:
        basis.append(coloring.astype(float) / math.sqrt(n))
    rng = make_rng(seed, "spectral", "power-iteration")

    def project(x):
        for b in basis:
            x = x - (b @ x) * b
        return x

    x = project(rng.standard_normal(n))
    if np.linalg.norm(x) == 0:
        return SpectrumReport(0.0, d, "power", 0.0, coloring is not None, False, "", 0)
    x /= np.linalg.norm(x)
    est, res = 0.0, math.inf
    for it in range(1, max_iter + 1):
        y = project(A @ (A @ x))
        rho = float(x @ y)
        res = float(np.linalg.norm(y - rho * x))
        est = math.sqrt(max(rho, 0.0))
        norm = np.linalg.norm(y)
        if norm == 0 or res < tol * max(1.0, d * d):
            report = SpectrumReport(est, d, "power", res, coloring is not None, False,
                                    "", it)
            return report
        x = y / norm
    report = SpectrumReport(est, d, "power", res, coloring is not None, False, "", max_iter)
    raise ConvergenceError(
        f"power iteration: residual {res:.3g} after {max_iter} iterations", report)


# mixing lemma audit

@dataclass(frozen=True)
class MixingAudit:
    max_violation: float
    worst_pair: tuple[tuple[int, ...], tuple[int, ...]]
    pairs_checked: int
    lam: float
    mode: str

    def as_dict(self) -> dict:
        return {
            "max_violation": self.max_violation,
            "worst_S": list(self.worst_pair[0]),
            "worst_T": list(self.worst_pair[1]),
            "pairs_checked": self.pairs_checked,
            "lambda": self.lam,
            "mode": self.mode,
        }


def _mask_rows(masks: np.ndarray, n: int) -> np.ndarray:
    return ((masks[:, None] >> np.arange(n)) & 1).astype(np.int64)


def _members(mask: int, n: int) -> tuple[int, ...]:
    return tuple(i for i in range(n) if (mask >> i) & 1)


def edge_count(G: RegularGraph, S, T) -> int:
    """|E(S, T)| with edges inside S & T counted twice (loops once per unit)."""
    xs = np.zeros(G.n, dtype=np.int64)
    xt = np.zeros(G.n, dtype=np.int64)
    xs[list(S)] = 1
    xt[list(T)] = 1
    return int(xs @ G.adj @ xt)


def mixing_slack(G: RegularGraph, lam: float, S, T) -> float:
    s, t = len(set(S)), len(set(T))
    e = edge_count(G, S, T)
    return abs(e - G.degree / G.n * s * t) - lam * math.sqrt(s * t)


def mixing_audit(G: RegularGraph, lam: float, pairs="exhaustive", count: int = 100_000,
                 seed: int = 0, workers: int = 1) -> MixingAudit:
    """Largest ``|E(S,T) - d|S||T|/n| - lam*sqrt(|S||T|)`` over audited pairs.

    ``pairs="exhaustive"`` covers all 4**n ordered pairs (n <= 14);
    ``pairs="sampled"`` draws ``count`` uniform pairs from the seeded stream.
    """
    n, d = G.n, G.degree
    A = G.adj
    if pairs == "exhaustive":
        if n > MIXING_GUARD:
            raise ValueError(f"exhaustive mixing audit guarded at n <= {MIXING_GUARD}")
        t_masks = np.arange(1 << n, dtype=np.int64)
        s_blocks = np.array_split(t_masks, max(1, (1 << n) // 256))
        checked = (1 << n) ** 2
    elif pairs == "sampled":
        rng = make_rng(seed, "spectral", "mixing")
        s_all = rng.integers(0, 2, size=(count, n)) @ (1 << np.arange(n))
        t_masks = None
        t_all = rng.integers(0, 2, size=(count, n)) @ (1 << np.arange(n))
        s_blocks = np.array_split(np.arange(count), max(1, count // 4096))
        checked = count
    else:
        raise ValueError(f"unknown pairs mode {pairs!r}")

    def run_block(block):
        if t_masks is not None:
            S = _mask_rows(block, n)
            T = _mask_rows(t_masks, n)
            E = S @ A @ T.T
            ss = S.sum(1)[:, None]
            tt = T.sum(1)[None, :]
            viol = np.abs(E - d / n * ss * tt) - lam * np.sqrt(ss * tt)
            flat = int(np.argmax(viol))
            i, j = divmod(flat, viol.shape[1])
            return float(viol[i, j]), (int(block[i]), int(t_masks[j]))
        S = _mask_rows(s_all[block], n)
        T = _mask_rows(t_all[block], n)
        E = np.einsum("ij,jk,ik->i", S, A, T)
        ss, tt = S.sum(1), T.sum(1)
        viol = np.abs(E - d / n * ss * tt) - lam * np.sqrt(ss * tt)
        i = int(np.argmax(viol))
        return float(viol[i]), (int(s_all[block][i]), int(t_all[block][i]))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run_block, s_blocks))
    else:
        results = [run_block(b) for b in s_blocks]
    # blocks are in order; keep the first maximum
    best_val, best_pair = results[0]
    for val, pair in results[1:]:
        if val > best_val:
            best_val, best_pair = val, pair
    pair = (_members(best_pair[0], n), _members(best_pair[1], n))
    return MixingAudit(best_val, pair, checked, lam, pairs)
