"""State validation and entanglement/fidelity measures for small registers."""

from __future__ import annotations

import numpy as np

SIGMA_Y = np.array([[0, -1j], [1j, 0]])


class StateValidationError(ValueError):
    pass


class UnsupportedObservableError(ValueError):
    pass


def validate_pure(psi, tol=1e-10) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    n = psi.size
    if n == 0 or n & (n - 1):
        raise StateValidationError(f"state length {n} is not a power of two")
    norm = np.vdot(psi, psi).real
    if abs(norm - 1) > tol:
        raise StateValidationError(f"state is not normalized (norm^2 = {norm})")
    return psi


def validate_density_matrix(rho, herm_tol=1e-12, trace_tol=1e-12, eig_tol=1e-10) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise StateValidationError("density matrix must be square")
    if np.max(np.abs(rho - rho.conj().T), initial=0.0) > herm_tol:
        raise StateValidationError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1) > trace_tol:
        raise StateValidationError(f"trace is {tr}")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -eig_tol:
        raise StateValidationError("density matrix has negative eigenvalues")
    return rho


def fidelity_pure(rho, psi) -> float:
    """<psi|rho|psi>, clipped to [0, 1]."""
    psi = np.asarray(psi, dtype=complex)
    return float(np.clip(np.vdot(psi, rho @ psi).real, 0.0, 1.0))


def purity(rho) -> float:
    return float(np.real(np.vdot(rho, rho)))


def von_neumann_entropy(rho, clamp=1e-12) -> float:
    """Entropy in nats; eigenvalues below ``clamp`` count as zero."""
    p = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    p = p[p > clamp]
    return float(max(0.0, -np.sum(p * np.log(p))))


def reduced_state(rho, keep, n_qubits) -> np.ndarray:
    """Partial trace onto the qubits listed in ``keep``."""
    keep = list(keep)
    t = np.asarray(rho).reshape([2] * (2 * n_qubits))
    drop = [q for q in range(n_qubits) if q not in keep]
    for shift, q in enumerate(sorted(drop, reverse=True)):
        m = n_qubits - shift
        t = np.trace(t, axis1=q, axis2=q + m)
    d = 2 ** len(keep)
    return t.reshape(d, d)


def concurrence(rho, clamp=1e-12) -> float:
    """Wootters concurrence of a two-qubit density matrix.

    The spin-flip eigenvalues are the singular values of sqrt(rho) Y sqrt(rho)^*,
    with Y = sigma_y x sigma_y. Eigenvalues of rho below ``clamp`` are set
    to zero first, which keeps pure states from picking up sqrt(roundoff) errors.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise UnsupportedObservableError("concurrence is defined here for two qubits only")
    p, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    p = np.where(p > clamp, p, 0.0)
    root = (v * np.sqrt(p)) @ v.conj().T
    yy = np.kron(SIGMA_Y, SIGMA_Y)
    lam = np.linalg.svd(root @ yy @ root.conj(), compute_uv=False)
    return float(np.clip(lam[0] - lam[1] - lam[2] - lam[3], 0.0, 1.0))


def trace_distance(rho, sigma) -> float:
    d = np.asarray(rho) - np.asarray(sigma)
    return float(0.5 * np.abs(np.linalg.eigvalsh(0.5 * (d + d.conj().T))).sum())


def equatorial_state(n_qubits, phase=np.pi / 2) -> np.ndarray:
    """Product of (|0> + e^{i phase}|1>)/sqrt(2); the default phase gives |0> + i|1>."""
    one = np.array([1.0, np.exp(1j * phase)]) / np.sqrt(2)
    psi = np.array([1.0 + 0j])
    for _ in range(n_qubits):
        psi = np.kron(psi, one)
    return psi
