"""Brute-force reference: dense qubit x truncated-Fock evolution.

Builds the full Hamiltonian on (C^2)^N x (C^{F+1})^M, propagates every
Fock product state of the truncated thermal ensemble, and traces the line
out. Nothing here relies on the displaced-oscillator solution.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .core import ConfigurationError, ModeSet, NetworkSpec
from .measures import validate_pure

SIGMA_Z = np.diag([1.0, -1.0])


class OracleLimitError(ConfigurationError):
    pass


@dataclass(frozen=True, eq=False)
class OracleResult:
    times: np.ndarray
    rhos: np.ndarray
    discarded_weight: float
    top_level_population: float
    cutoff_spread: float = 0.0

    @property
    def truncation_bound(self) -> float:
        return self.discarded_weight + self.cutoff_spread


def _embed(op, pos, dims):
    mats = [sp.identity(d, format="csr") for d in dims]
    mats[pos] = sp.csr_matrix(op)
    out = mats[0]
    for m in mats[1:]:
        out = sp.kron(out, m, format="csr")
    return out


def full_hamiltonian(spec: NetworkSpec, modes: ModeSet, fock_cutoff: int) -> sp.csr_matrix:
    N, M = spec.n_qubits, modes.n_modes
    F = fock_cutoff + 1
    dims = [2] * N + [F] * M
    a = np.diag(np.sqrt(np.arange(1, F)), 1)
    num = np.diag(np.arange(F, dtype=float))
    x = a + a.T
    H = sp.csr_matrix((int(np.prod(dims)),) * 2, dtype=float)
    for i in range(N):
        H = H + 0.5 * spec.frequencies[i] * _embed(SIGMA_Z, i, dims)
    for n in range(M):
        H = H + modes.omega[n] * _embed(num, N + n, dims)
        xn = _embed(x, N + n, dims)
        for i in range(N):
            g = modes.couplings[i, n]
            if g != 0:
                H = H + g * (_embed(SIGMA_Z, i, dims) @ xn)
    return H.tocsr()


def thermal_weights(nbar, fock_cutoff):
    """Per-mode Boltzmann weights on 0..F and the total discarded weight."""
    ks = np.arange(fock_cutoff + 1)
    per_mode = []
    kept = 1.0
    for nb in np.atleast_1d(nbar):
        if nb == 0:
            w = (ks == 0).astype(float)
        else:
            q = nb / (nb + 1)
            w = (1 - q) * q**ks
        kept *= w.sum()
        per_mode.append(w / w.sum())
    return per_mode, 1.0 - kept


def _propagate(spec, modes, psi0, times, fock_cutoff, dense_limit, min_weight):
    N, M = spec.n_qubits, modes.n_modes
    S, F = 2**N, fock_cutoff + 1
    B = F**M
    dim = S * B
    weights, discarded = thermal_weights(modes.thermal_occ, fock_cutoff)
    occ = []
    for ks in itertools.product(range(F), repeat=M):
        w = float(np.prod([weights[n][k] for n, k in enumerate(ks)]))
        if w > min_weight:
            occ.append((w, int(np.ravel_multi_index(ks, (F,) * M)) if M else 0))
    w_arr = np.array([w for w, _ in occ])
    w_arr = w_arr / w_arr.sum()
    init = np.zeros((dim, len(occ)), dtype=complex)
    for col, (_, b) in enumerate(occ):
        init[b::B, col] = psi0  # spin index major, boson index minor

    H = full_hamiltonian(spec, modes, fock_cutoff)
    if dim <= dense_limit:
        E, V = np.linalg.eigh(H.toarray())
        C = V.conj().T @ init

        def state_at(t):
            return V @ (np.exp(-1j * E * t)[:, None] * C)

    else:

        def state_at(t):
            return expm_multiply(-1j * t * H, init) if t != 0 else init

    rhos = np.empty((times.size, S, S), dtype=complex)
    leak = 0.0
    for k, t in enumerate(times):
        psi = state_at(t).reshape(S, B, len(occ))
        rhos[k] = np.einsum("sbk,tbk,k->st", psi, psi.conj(), w_arr)
        if M:
            prob = np.einsum("sbk,k->b", np.abs(psi) ** 2, w_arr).reshape((F,) * M)
            for n in range(M):
                leak = max(leak, float(np.moveaxis(prob, n, 0)[-1].sum()))
    return rhos, float(discarded), leak


def evolve_oracle(
    spec: NetworkSpec,
    modes: ModeSet,
    psi0,
    times,
    fock_cutoff: int = 12,
    max_dim: int = 200_000,
    weight_tol: float = 1e-2,
    dense_limit: int = 3000,
    min_weight: float = 1e-14,
    estimate_truncation: bool = True,
) -> OracleResult:
    """Dense reference evolution with Fock levels 0..fock_cutoff per mode.

    The reported truncation bound is the discarded thermal weight plus, when
    ``estimate_truncation`` is set, the largest trace distance to a second
    run with two fewer Fock levels. Truncation errors fall off geometrically
    in the cutoff, so that difference overestimates the remaining error.
    """
    from .measures import trace_distance

    times = np.atleast_1d(np.asarray(times, dtype=float))
    psi0 = validate_pure(psi0)
    dim = 2**spec.n_qubits * (fock_cutoff + 1) ** modes.n_modes
    if dim > max_dim:
        raise OracleLimitError(f"Hilbert dimension {dim} exceeds limit {max_dim}")
    _, discarded = thermal_weights(modes.thermal_occ, fock_cutoff)
    if discarded > weight_tol:
        raise OracleLimitError(f"truncated thermal weight {discarded:.3g} exceeds {weight_tol}")
    rhos, discarded, leak = _propagate(spec, modes, psi0, times, fock_cutoff, dense_limit, min_weight)
    spread = 0.0
    if estimate_truncation and modes.n_modes and fock_cutoff > 2:
        lower, _, _ = _propagate(spec, modes, psi0, times, fock_cutoff - 2, dense_limit, min_weight)
        spread = max(trace_distance(a, b) for a, b in zip(rhos, lower))
    return OracleResult(times, rhos, discarded, leak, spread)
