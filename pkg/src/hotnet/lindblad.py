"""Spins coupled longitudinally to one damped, thermally driven mode.

H = Delta a^dag a + sum_i g_i Z_i (a + a^dag), with dissipators
(gamma_phi / 2) sum_i D[Z_i], kappa (nbar + 1) D[a] and kappa nbar D[a^dag].

The Hamiltonian and every dissipator are diagonal in the spin basis, so
the joint state splits into oscillator blocks rho[s, t] (one per pair of
spin configurations) that evolve independently. Each block is propagated
with a symmetric splitting: exact oscillator unitaries per spin
configuration and the exact exponential of the damping superoperator.
Qubit dephasing multiplies block (s, t) by exp(-gamma_phi t Hamming(s, t))
and commutes with everything else, so it is applied exactly once per
cycle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .core import spin_configurations


class IntegrationError(RuntimeError):
    pass


class FockLeakageWarning(UserWarning):
    pass


@dataclass(frozen=True)
class NoiseModel:
    gamma_phi: float = 0.0
    kappa: float = 0.0
    nbar_th: float = 0.0
    fock_cutoff: int | None = None

    def __post_init__(self):
        if min(self.gamma_phi, self.kappa, self.nbar_th) < 0:
            raise ValueError("noise rates and occupation must be nonnegative")
        if self.fock_cutoff is not None and self.fock_cutoff < 2 * self.nbar_th + 4:
            warnings.warn("fock_cutoff below 2 nbar + 4", FockLeakageWarning)

    @property
    def kappa_eff(self) -> float:
        return self.kappa * (2 * self.nbar_th + 1)


def default_fock_cutoff(nbar: float, max_displacement: float = 0.0, tail: float = 1e-6) -> int:
    """max(8, ceil(4 (nbar + 1))), raised until the thermal tail and displacement fit."""
    base = max(8, math.ceil(4 * (nbar + 1)))
    if nbar > 0:
        q = nbar / (nbar + 1)
        base = max(base, math.ceil(math.log(tail) / math.log(q)) + 2)
    return base + math.ceil(2 * max_displacement**2)


def ladder(F: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, F)), 1)


def thermal_state(nbar: float, F: int) -> np.ndarray:
    """Truncated and renormalized thermal state."""
    if nbar == 0:
        p = np.zeros(F)
        p[0] = 1.0
    else:
        q = nbar / (nbar + 1)
        p = q ** np.arange(F)
    return np.diag(p / p.sum()).astype(complex)


def damping_superoperator(kappa, nbar, F) -> np.ndarray:
    """Row-major vectorized generator of kappa (nbar+1) D[a] + kappa nbar D[a^dag].

    Built from the truncated a and a^dag = a.T, which keeps it exactly
    trace preserving.
    """
    a = ladder(F)
    ad = a.T
    eye = np.eye(F)

    def dis(c):
        cdc = c.T.conj() @ c
        # vec(A X B) = (A kron B^T) vec(X) for row-major vec
        return np.kron(c, c.conj()) - 0.5 * np.kron(cdc, eye) - 0.5 * np.kron(eye, cdc.T)

    return kappa * (nbar + 1) * dis(a) + kappa * nbar * dis(ad)


def hamming_matrix(n_qubits: int) -> np.ndarray:
    s = spin_configurations(n_qubits)
    return 0.5 * (n_qubits - s @ s.T)


@dataclass
class JointState:
    """Spin-oscillator density matrix stored as blocks rho[s, t] of shape (F, F)."""

    blocks: np.ndarray
    n_qubits: int

    @classmethod
    def product(cls, spin_rho, osc_rho):
        spin_rho = np.asarray(spin_rho, dtype=complex)
        n = int(round(math.log2(spin_rho.shape[0])))
        return cls(spin_rho[:, :, None, None] * osc_rho[None, None], n)

    @property
    def fock_cutoff(self) -> int:
        return self.blocks.shape[-1]

    def spin_state(self) -> np.ndarray:
        return np.trace(self.blocks, axis1=2, axis2=3)

    def oscillator_populations(self) -> np.ndarray:
        S = self.blocks.shape[0]
        diag = self.blocks[np.arange(S), np.arange(S)]
        return np.real(np.diagonal(diag, axis1=1, axis2=2)).sum(axis=0)

    def trace(self) -> float:
        return float(np.real(np.trace(self.spin_state())))

    def apply_spin_unitary(self, U):
        b = np.tensordot(U, self.blocks, axes=(1, 0))
        self.blocks = np.tensordot(b, U.conj(), axes=(1, 1)).transpose(0, 3, 1, 2)


@dataclass
class CycleDiagnostics:
    max_trace_drift: float = 0.0
    max_leakage: float = 0.0
    min_eigenvalue: float = 0.0
    n_steps: int = 0


def evolve_cycle(state: JointState, amplitudes, duration, Delta, noise: NoiseModel,
                 steps_per_period=2, diag: CycleDiagnostics | None = None,
                 damping_cache: dict | None = None):
    """Evolve ``state`` in place for one stroboscopic cycle with fixed couplings."""
    n = state.n_qubits
    s = spin_configurations(n)
    lam = s @ np.asarray(amplitudes, dtype=float)
    if noise.gamma_phi > 0:
        state.blocks *= np.exp(-noise.gamma_phi * duration * hamming_matrix(n))[:, :, None, None]
    if duration == 0:
        return state
    period = 2 * math.pi / abs(Delta)
    n_steps = max(1, int(round(duration / period * steps_per_period)))
    h = duration / n_steps
    F = state.fock_cutoff
    a = ladder(F)
    x = a + a.T
    num = np.diag(np.arange(F, dtype=float))
    # one oscillator unitary per distinct lambda
    uniq, inv = np.unique(np.round(lam, 14), return_inverse=True)
    Us = np.stack([expm(-1j * h * (Delta * num + lv * x)) for lv in uniq])[inv]
    Uh = Us.conj().transpose(0, 2, 1)
    S = 2**n
    if noise.kappa > 0:
        key = (noise.kappa, noise.nbar_th, F, h)
        cache = damping_cache if damping_cache is not None else {}
        if key not in cache:
            L = damping_superoperator(noise.kappa, noise.nbar_th, F)
            cache[key] = (expm(0.5 * h * L).T.copy(), expm(h * L).T.copy())
        Ehalf, Efull = cache[key]
    else:
        Ehalf = Efull = None

    def damp(E):
        if E is not None:
            state.blocks = (state.blocks.reshape(S * S, F * F) @ E).reshape(S, S, F, F)

    damp(Ehalf)
    for k in range(n_steps):
        state.blocks = np.matmul(np.matmul(Us[:, None], state.blocks), Uh[None, :])
        damp(Efull if k < n_steps - 1 else Ehalf)
    if diag is not None:
        diag.n_steps += n_steps
        diag.max_trace_drift = max(diag.max_trace_drift, abs(state.trace() - 1))
        pops = state.oscillator_populations()
        diag.max_leakage = max(diag.max_leakage, float(pops[-2:].sum()))
    return state


def stroboscopic_phases(amplitudes, duration, Delta, n_qubits) -> np.ndarray:
    """Exact spin phases lambda_s^2 t / Delta accumulated at a stroboscopic time."""
    lam = spin_configurations(n_qubits) @ np.asarray(amplitudes, dtype=float)
    return lam**2 * duration / Delta
