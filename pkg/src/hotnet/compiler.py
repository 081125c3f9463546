"""Compile a target Ising phase matrix into stroboscopic coupling cycles.

A cycle with amplitudes g_i held for a stroboscopic time t_p imprints
phases g_i g_j t_p / omega1 on every pair. Diagonalizing the target
w = sum_q w_q u_q u_q^T gives one cycle per eigenpair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

STRATEGIES = ("signed", "shift", "positive")


class CompilationError(ValueError):
    pass


class GenerationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TargetModel:
    """Symmetric phase-weight matrix w with a recorded diagonal shift."""

    w: np.ndarray
    diagonal_shift: float = 0.0
    provenance: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("target matrix must be square")
        if not np.allclose(w, w.T, rtol=0, atol=1e-12 * max(1.0, np.abs(w).max(initial=0))):
            raise ValueError("target matrix must be symmetric")
        w = 0.5 * (w + w.T)
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.w.shape[0]

    def off_diagonal(self) -> np.ndarray:
        out = self.w.copy()
        np.fill_diagonal(out, 0.0)
        return out


@dataclass(frozen=True, eq=False)
class Cycle:
    amplitudes: np.ndarray
    sign: int
    duration: float
    p: int
    weight: float


@dataclass(frozen=True, eq=False)
class CycleSchedule:
    cycles: tuple
    omega1: float
    shift: float = 0.0
    n_qubits: int = 0

    @property
    def eta(self) -> int:
        return len(self.cycles)

    @property
    def tau(self) -> float:
        return 2 * math.pi / self.omega1

    @property
    def total_duration(self) -> float:
        return float(sum(c.duration for c in self.cycles))

    def truncated(self, eta: int) -> "CycleSchedule":
        return CycleSchedule(self.cycles[:eta], self.omega1, self.shift, self.n_qubits)


def _eigenpairs(w, strategy, tol):
    if strategy not in STRATEGIES:
        raise CompilationError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    vals, vecs = np.linalg.eigh(w)
    scale = max(np.abs(vals).max(initial=0.0), 1e-300)
    shift = 0.0
    if vals.size and vals.min() < -tol * scale:
        if strategy == "positive":
            raise CompilationError(
                f"target has negative eigenvalue {vals.min():.3g}; use strategy 'signed' or 'shift'"
            )
        if strategy == "shift":
            shift = -vals.min()
            vals = vals + shift
    order = np.argsort(-np.abs(vals), kind="stable")
    keep = [q for q in order if abs(vals[q]) > tol * max(scale, shift)]
    return vals, vecs, keep, shift


def compile_schedule(target, omega1, J_max, g_max, strategy="signed", tol=1e-12) -> CycleSchedule:
    """One stroboscopic cycle per retained eigenpair, largest |w_q| first.

    Each t_p is the smallest multiple of tau = 2 pi/omega1 that satisfies
    both |w_q| <= J_max t_p and max_i |g_i| <= g_max. The amplitudes are
    then scaled to reproduce w_q exactly.
    """
    if J_max <= 0 or g_max <= 0 or omega1 <= 0:
        raise CompilationError("omega1, J_max and g_max must be positive")
    w = target.w if isinstance(target, TargetModel) else TargetModel(target).w
    vals, vecs, keep, shift = _eigenpairs(w, strategy, tol)
    tau = 2 * math.pi / omega1
    cycles = []
    for q in keep:
        wq = abs(vals[q])
        u = vecs[:, q]
        t_min = max(wq / J_max, wq * omega1 * np.max(u**2) / g_max**2)
        p = max(1, math.ceil(t_min / tau * (1 - 1e-12)))
        t_p = p * tau
        amps = math.sqrt(wq * omega1 / t_p) * u
        cycles.append(Cycle(amps, 1 if vals[q] >= 0 else -1, t_p, p, float(vals[q])))
    return CycleSchedule(tuple(cycles), omega1, shift, w.shape[0])


def reconstruct(schedule: CycleSchedule) -> TargetModel:
    """w = sum_q sign_q g^(q) g^(q)^T t_p / omega1, minus the recorded shift."""
    N = schedule.n_qubits
    w = np.zeros((N, N))
    for c in schedule.cycles:
        w += c.sign * np.outer(c.amplitudes, c.amplitudes) * c.duration / schedule.omega1
    w -= schedule.shift * np.eye(N)
    return TargetModel(0.5 * (w + w.T), schedule.shift, "reconstruction")


def convergence_curve(target, omega1, J_max, g_max, strategy="signed", norm=2) -> np.ndarray:
    """eps(eta) = ||w^(eta) - w|| for eta = 1..N (spectral norm by default)."""
    w = target.w if isinstance(target, TargetModel) else np.asarray(target, dtype=float)
    sched = compile_schedule(TargetModel(w), omega1, J_max, g_max, strategy)
    N = w.shape[0]
    out = np.empty(N)
    for eta in range(1, N + 1):
        rec = reconstruct(sched.truncated(min(eta, sched.eta))).w
        out[eta - 1] = np.linalg.norm(rec - w, norm)
    return out


def relative_error(schedule: CycleSchedule, target: TargetModel, norm="fro") -> float:
    ref = np.linalg.norm(target.w, norm)
    diff = np.linalg.norm(reconstruct(schedule).w - target.w, norm)
    return float(diff / ref) if ref > 0 else float(diff)


def powerlaw1d(n, alpha=1.0, periodic=False) -> TargetModel:
    """w_ij = 1/|i-j|^alpha, zero diagonal; minimum image distance if periodic."""
    i = np.arange(n)
    dist = np.abs(i[:, None] - i[None, :]).astype(float)
    if periodic:
        dist = np.minimum(dist, n - dist)
    w = np.zeros((n, n))
    mask = dist > 0
    w[mask] = dist[mask] ** (-float(alpha))
    return TargetModel(w, 0.0, "powerlaw1d", {"n": n, "alpha": alpha, "periodic": periodic})


def nn2d(rows, cols=None) -> TargetModel:
    """Nearest-neighbour couplings on a grid, site index i = i_x + rows * i_y."""
    cols = rows if cols is None else cols
    n = rows * cols
    w = np.zeros((n, n))
    for iy in range(cols):
        for ix in range(rows):
            i = ix + rows * iy
            if ix + 1 < rows:
                w[i, i + 1] = w[i + 1, i] = 1.0
            if iy + 1 < cols:
                w[i, i + rows] = w[i + rows, i] = 1.0
    return TargetModel(w, 0.0, "nn2d", {"rows": rows, "cols": cols})


def spinglass(n, seed=0, low=-0.5, high=0.5) -> TargetModel:
    """Symmetric couplings drawn uniformly from [low, high], zero diagonal."""
    rng = np.random.default_rng(seed)
    a = rng.uniform(low, high, size=(n, n))
    w = np.triu(a, 1)
    return TargetModel(w + w.T, 0.0, "spinglass", {"n": n, "seed": seed, "low": low, "high": high})


def graph_target(n, edges, d=None, provenance="graph", params=None) -> TargetModel:
    """Max-Cut weights w = A + d I from an edge list of (u, v[, weight]).

    ``d`` defaults to the largest weighted degree, which equals the degree
    for regular graphs.
    """
    A = np.zeros((n, n))
    for e in edges:
        u, v = int(e[0]), int(e[1])
        wt = float(e[2]) if len(e) > 2 else 1.0
        if u == v or not (0 <= u < n and 0 <= v < n):
            raise GenerationError(f"invalid edge {e} for {n} vertices")
        A[u, v] += wt
        A[v, u] += wt
    if d is None:
        d = float(A.sum(axis=1).max(initial=0.0))
    meta = {"n": n, "edges": [tuple(e) for e in edges], "d": d}
    meta.update(params or {})
    return TargetModel(A + d * np.eye(n), float(d), provenance, meta)


def dregular(n, d, seed=0) -> TargetModel:
    """Random d-regular graph (complete graph when d = n - 1) with w = A + d I."""
    import networkx as nx

    if n * d % 2 or d >= n or d < 0:
        raise GenerationError(f"no {d}-regular graph on {n} vertices")
    g = nx.complete_graph(n) if d == n - 1 else nx.random_regular_graph(d, n, seed=seed)
    edges = sorted((min(u, v), max(u, v)) for u, v in g.edges())
    return graph_target(n, edges, d, "dregular", {"seed": seed})


def generate_target(kind: str, **params) -> TargetModel:
    makers = {"powerlaw1d": powerlaw1d, "nn2d": nn2d, "spinglass": spinglass, "dregular": dregular}
    if kind == "graph":
        return graph_target(**params)
    if kind not in makers:
        raise GenerationError(f"unknown target kind {kind!r}")
    return makers[kind](**params)


def adjacency(target: TargetModel) -> np.ndarray:
    return target.off_diagonal()
