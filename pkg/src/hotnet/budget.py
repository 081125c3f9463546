"""Closed-form decoherence error estimates and feasibility numbers.

Rates are angular (rad/s or any consistent unit). Temperatures passed as
kelvin go through ``thermal_energy``; everything else takes k_B*T/hbar
directly as a rate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import constants

# Rethermalization prefactor for the two-qubit gate, a numerically obtained
# literature value rather than something this package derives.
ALPHA_KAPPA = 3.0
ALPHA_KAPPA_PROVENANCE = "quoted numerical fit, not re-derived"


class BudgetError(ValueError):
    pass


def thermal_energy(kelvin: float) -> float:
    """k_B T / hbar in rad/s."""
    return constants.k * kelvin / constants.hbar


def alpha_gamma(n_qubits: int) -> float:
    """Dephasing prefactor N*pi/8 for a gate of duration pi/(4J)."""
    return n_qubits * math.pi / 8


def dephasing_error(n_qubits, gamma_phi, t, target_state=None) -> float:
    """Pure-dephasing error (gamma t / 2) sum_i (1 - <Z_i>^2).

    Without a target state every qubit counts fully, giving N gamma t / 2.
    ``target_state`` may be a state vector or a density matrix.
    """
    if gamma_phi < 0 or t < 0:
        raise BudgetError("rate and time must be nonnegative")
    if gamma_phi * t > 0.1:
        warnings.warn("gamma_phi * t is not small; linearized estimate may be poor", RuntimeWarning)
    if target_state is None:
        weight = float(n_qubits)
    else:
        from .core import spin_configurations

        st = np.asarray(target_state)
        p = np.abs(st) ** 2 if st.ndim == 1 else np.real(np.diag(st))
        z = p @ spin_configurations(n_qubits)
        weight = float(np.sum(1 - z**2))
    return 0.5 * gamma_phi * t * weight


def rethermalization_error(kappa, nbar, Delta, gammabar, M, N, d) -> float:
    """(kappa (1 + 2 nbar) / |Delta|) * gammabar * M * N * d."""
    if Delta == 0:
        raise BudgetError("detuning must be nonzero")
    if kappa < 0 or nbar < 0:
        raise BudgetError("kappa and nbar must be nonnegative")
    return kappa * (1 + 2 * nbar) / abs(Delta) * gammabar * M * N * d


def two_qubit_rethermalization_error(kappa, omega1, nbar, alpha_kappa=ALPHA_KAPPA) -> float:
    return alpha_kappa * kappa / omega1 * nbar


def kappa_nbar(omega, Q, temperature_rate) -> float:
    """kappa * nbar for a mode of quality factor Q.

    Uses k_B T / Q when k_B T / omega > 2, the exact Bose factor otherwise.
    """
    if temperature_rate / omega > 2:
        return temperature_rate / Q
    from .core import bose_occupation

    return omega / Q * float(bose_occupation(omega, temperature_rate))


def cooperativity(g, gamma_phi, kappa_eff) -> float:
    if g == 0 or gamma_phi <= 0 or kappa_eff <= 0:
        raise BudgetError("cooperativity needs g != 0 and positive rates")
    return g**2 / (gamma_phi * kappa_eff)


@dataclass(frozen=True)
class CooperativityOptimum:
    C: float
    omega1_star: float
    xi_opt: float
    alpha_gamma: float
    alpha_kappa: float


def cooperativity_optimum(g, gamma_phi, temperature_rate, Q, n_qubits=2, alpha_kappa=ALPHA_KAPPA):
    """Optimal line frequency and error for a two-qubit gate.

    ``temperature_rate`` is k_B T / hbar. Uses the high-temperature form
    C = g^2 Q / (gamma_phi k_B T).
    """
    if min(abs(g), gamma_phi, temperature_rate, Q) <= 0:
        raise BudgetError("all inputs must be positive")
    ag = alpha_gamma(n_qubits)
    C = g**2 * Q / (gamma_phi * temperature_rate)
    w_star = math.sqrt(alpha_kappa / ag * temperature_rate * g**2 / (Q * gamma_phi))
    xi = 2 * math.sqrt(alpha_kappa * ag) / math.sqrt(C)
    return CooperativityOptimum(C, w_star, xi, ag, alpha_kappa)


def two_qubit_error(omega1, g, gamma_phi, temperature_rate, Q, n_qubits=2, alpha_kappa=ALPHA_KAPPA):
    """alpha_k k_B T / (Q w1) + alpha_g gamma_phi w1 / g^2, before optimizing w1."""
    return alpha_kappa * temperature_rate / (Q * omega1) + alpha_gamma(n_qubits) * gamma_phi * omega1 / g**2


def qaoa_error(gammabar, d, M, N, C) -> float:
    """Compact estimate gammabar d M N^{3/2} / sqrt(C)."""
    if C <= 0:
        raise BudgetError("cooperativity must be positive")
    return gammabar * d * M * N**1.5 / math.sqrt(C)


def run_time(gammabar, M, N, d, J_max) -> float:
    return gammabar * M * N * d / J_max


@dataclass(frozen=True)
class Feasibility:
    xi_total: float
    t_run: float | None
    max_N: float | None
    max_M: float | None


def qaoa_feasibility(gammabar, d, M, N, C, J_max=None, xi_budget=None) -> Feasibility:
    """Error, run time and the largest N (resp. M) that fit an error budget."""
    xi = qaoa_error(gammabar, d, M, N, C) if M > 0 else 0.0
    t_run = run_time(gammabar, M, N, d, J_max) if J_max else None
    max_N = max_M = None
    if xi_budget is not None:
        if M > 0:
            max_N = (xi_budget * math.sqrt(C) / (gammabar * d * M)) ** (2 / 3)
        max_M = xi_budget * math.sqrt(C) / (gammabar * d * N**1.5)
    return Feasibility(xi, t_run, max_N, max_M)


def feasibility_table(gammabar, d, C, xi_budget, M_values, N_values):
    """Rows (M, max N) and (N, max M) for a fixed error budget."""
    rows_N = [(M, qaoa_feasibility(gammabar, d, M, 1, C, xi_budget=xi_budget).max_N) for M in M_values]
    rows_M = [(N, qaoa_feasibility(gammabar, d, 1, N, C, xi_budget=xi_budget).max_M) for N in N_values]
    return rows_N, rows_M


def qaoa_total_error(Delta, g, gamma_phi, kappa_eff, gammabar, M, N, d) -> float:
    """xi_phi + xi_kappa for a single-mode run at detuning Delta.

    J_max = 2 g^2 / |Delta| and xi_phi = N gamma_phi t_run / 2.
    """
    J_max = 2 * g**2 / abs(Delta)
    t = run_time(gammabar, M, N, d, J_max)
    return 0.5 * N * gamma_phi * t + kappa_eff * gammabar * M * N * d / abs(Delta)


def optimal_detuning(g, gamma_phi, kappa_eff, N) -> float:
    """|Delta| that minimizes ``qaoa_total_error``."""
    return 2 * g * math.sqrt(kappa_eff / (gamma_phi * N))


def timing_error_formula(omega1, dt, g, nbar, varS1, varS1sq):
    """(w1 dt)^2 {(2 nbar + 1)(g/w1)^2 Var(S1) + (g/w1)^4 Var(S1^2)}."""
    dt = np.asarray(dt, dtype=float)
    r = g / omega1
    return (omega1 * dt) ** 2 * ((2 * nbar + 1) * r**2 * varS1 + r**4 * varS1sq)


def timing_formula_valid(omega1, dt, nbar, limit=0.1) -> bool:
    return bool(np.all(omega1 * np.abs(dt) * max(nbar, 1.0) <= limit))


@dataclass(frozen=True)
class ErrorBudget:
    xi_phi: float
    xi_kappa: float
    xi_timing: float
    xi_total: float
    cooperativity_C: float
    omega1_star: float | None
    t_run: float
    alpha_gamma: float
    alpha_kappa: float
    varS1: float | None = None
    varS1sq: float | None = None


def qaoa_budget(g, gamma_phi, kappa, nbar, Delta, gammabar, M, N, d, dt=0.0, varS=(0.0, 0.0)) -> ErrorBudget:
    """Assemble the single-mode QAOA error budget at detuning ``Delta``."""
    J_max = 2 * g**2 / abs(Delta)
    t = run_time(gammabar, M, N, d, J_max)
    xi_phi = 0.5 * N * gamma_phi * t
    xi_k = rethermalization_error(kappa, nbar, Delta, gammabar, M, N, d)
    xi_t = float(timing_error_formula(abs(Delta), dt, g, nbar, *varS))
    k_eff = kappa * (2 * nbar + 1)
    C = cooperativity(g, gamma_phi, k_eff) if gamma_phi > 0 and k_eff > 0 else math.inf
    return ErrorBudget(
        xi_phi, xi_k, xi_t, xi_phi + xi_k + xi_t, C, None, t,
        alpha_gamma(N), ALPHA_KAPPA, varS[0], varS[1],
    )
