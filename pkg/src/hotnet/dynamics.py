"""Exact finite-temperature spin dynamics for longitudinal coupling.

Every spin configuration s drives each mode with a constant force
lambda_n(s) = sum_i g_{i,n} s_i, so the line only ever holds coherent
displacements on top of the thermal state. Tracing the line out gives a
closed form for the reduced spin state at any time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .core import (
    ConfigurationError,
    ModeSet,
    NetworkSpec,
    build_mode_set,
    coupling_matrix_modesum,
    default_n_modes,
    spin_configurations,
)
from .measures import (
    UnsupportedObservableError,
    concurrence,
    equatorial_state,
    fidelity_pure,
    validate_pure,
    von_neumann_entropy,
)


@dataclass(frozen=True, eq=False)
class DisplacementRecord:
    """Per-configuration drive, displacement and polaron phase.

    ``lam`` has shape (S, n_modes), ``alpha`` (S, n_modes, T) and
    ``phase`` (S, T), with S = 2**N configurations in basis order.
    """

    times: np.ndarray
    lam: np.ndarray
    alpha: np.ndarray
    phase: np.ndarray

    def coherence_exponent(self, nbar, s, sp, t_index):
        """Log of the thermal decay factor between configurations s and s'."""
        d = self.alpha[s, :, t_index] - self.alpha[sp, :, t_index]
        return -np.sum((2 * nbar + 1) * np.abs(d) ** 2) / 2


def displacement_record(modes: ModeSet, times) -> DisplacementRecord:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    spins = spin_configurations(modes.n_qubits)
    lam = spins @ modes.couplings
    w = modes.omega[:, None]
    wt = w * times[None, :]
    alpha = -(lam / modes.omega)[:, :, None] * (1 - np.exp(-1j * wt))[None]
    phase = (lam**2 / modes.omega**2) @ (wt - np.sin(wt))
    return DisplacementRecord(times, lam, alpha, phase)


def zz_energies(J, n_qubits) -> np.ndarray:
    """sum_{i<j} J_ij s_i s_j for every configuration."""
    spins = spin_configurations(n_qubits)
    return 0.5 * np.einsum("si,ij,sj->s", spins, np.asarray(J, dtype=float), spins)


def local_energies(spec: NetworkSpec) -> np.ndarray:
    return spin_configurations(spec.n_qubits) @ spec.frequencies / 2


def _as_density(psi0, n_states):
    arr = np.asarray(psi0, dtype=complex)
    if arr.ndim == 1:
        psi = validate_pure(arr)
        rho = np.outer(psi, psi.conj())
    else:
        rho = arr
        if abs(np.trace(rho) - 1) > 1e-10:
            from .measures import StateValidationError

            raise StateValidationError("initial density matrix is not normalized")
    if rho.shape != (n_states, n_states):
        raise ConfigurationError(f"initial state has dimension {rho.shape[0]}, expected {n_states}")
    return rho


def coherence_factors(lam, omega, nbar, energies, times) -> np.ndarray:
    """Factors f_{ss'}(t) with rho_{ss'}(t) = f_{ss'}(t) rho_{ss'}(0), shape (T, S, S)."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    lam = np.asarray(lam, dtype=float)
    omega = np.asarray(omega, dtype=float)
    out = np.empty((times.size, lam.shape[0], lam.shape[0]), dtype=complex)
    q_phase = lam**2 / omega**2
    for k, t in enumerate(times):
        wt = omega * t
        # |1 - exp(-i w t)|^2 = 4 sin^2(w t / 2); written this way it is exactly 0 at stroboscopic times
        w = (2 * nbar + 1) * 2 * np.sin(wt / 2) ** 2 / omega**2
        sq = (lam**2) @ w
        cross = (lam * w) @ lam.T
        decay = sq[:, None] + sq[None, :] - 2 * cross
        np.fill_diagonal(decay, 0.0)
        phi = q_phase @ (wt - np.sin(wt))
        ang = phi[:, None] - phi[None, :] - t * (energies[:, None] - energies[None, :])
        out[k] = np.exp(-np.maximum(decay, 0.0)) * np.exp(1j * ang)
    return out


def evolve_exact(spec: NetworkSpec, modes: ModeSet, psi0, times) -> np.ndarray:
    """Reduced spin density matrices at each time, shape (T, 2^N, 2^N).

    The line starts in its thermal state at ``spec.temperature`` (as
    encoded in ``modes.thermal_occ``).
    """
    if modes.n_qubits != spec.n_qubits:
        raise ConfigurationError("mode set and network disagree on the number of qubits")
    S = 2**spec.n_qubits
    rho0 = _as_density(psi0, S)
    lam = spin_configurations(spec.n_qubits) @ modes.couplings
    f = coherence_factors(lam, modes.omega, modes.thermal_occ, local_energies(spec), times)
    return f * rho0[None]


def target_state(spec: NetworkSpec, J, psi0, t) -> np.ndarray:
    """exp(-i t [sum_i w_i Z_i / 2 + sum_{i<j} J_ij Z_i Z_j]) psi0."""
    psi0 = validate_pure(psi0)
    e = local_energies(spec) + zz_energies(J, spec.n_qubits)
    return np.exp(-1j * t * e) * psi0


def zz_gate(J_phase, n_qubits) -> np.ndarray:
    """Diagonal of exp(-i sum_{i<j} phi_ij Z_i Z_j)."""
    return np.exp(-1j * zz_energies(J_phase, n_qubits))


def calibrate_pair(modes: ModeSet, J_target: float, pair=(0, 1)) -> ModeSet:
    """Rescale all couplings so the truncated mode sum hits ``J_target`` for ``pair``.

    Needed when a finite mode set should realize an exact gate angle: the
    truncated sum converges to the closed form only slowly in n_modes.
    """
    J = coupling_matrix_modesum(modes)[pair]
    if J == 0 or J_target / J <= 0:
        raise ConfigurationError("cannot calibrate: mode sum and target differ in sign or vanish")
    return modes.scaled(math.sqrt(J_target / J))


@dataclass(frozen=True, eq=False)
class GateReport:
    times: np.ndarray
    fidelity: np.ndarray
    entropy: np.ndarray | None
    concurrence: np.ndarray | None
    mode_occ: np.ndarray
    realspace_x: np.ndarray
    realspace_occ: np.ndarray
    total_photons: np.ndarray
    net_photons: np.ndarray
    purity: np.ndarray


def photon_observables(modes: ModeSet, populations, times, x_grid=None, length=None):
    """Mode occupations, cross-mode coherences along x, and totals.

    Returns (mode_occ (T, n), x_grid, realspace_occ (T, n_x)). ``length``
    sets the real-space normalization sqrt(2/L).
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    p = np.asarray(populations, dtype=float)
    rec_lam = spin_configurations(modes.n_qubits) @ modes.couplings
    wt = modes.omega[None, :] * times[:, None]
    shape = (1 - np.exp(-1j * wt)) / modes.omega[None, :]
    # alpha_n(s, t) = -lam_n(s) * shape_n(t)
    amp2 = 4 * np.sin(wt / 2) ** 2 / modes.omega[None, :] ** 2
    mode_occ = modes.thermal_occ[None, :] + amp2 * (p @ rec_lam**2)[None, :]
    if length is None:
        length = math.pi / modes.k[0] if modes.k[0] > 0 else 1.0
    if x_grid is None:
        x_grid = np.arange(1, modes.n_modes + 1) * length / (modes.n_modes + 1)
    sines = math.sqrt(2 / length) * np.sin(np.outer(x_grid, modes.k))
    thermal_x = (sines**2) @ modes.thermal_occ
    # sum_s p_s |sum_n sin(k_n x) alpha_n(s,t)|^2
    coh = np.einsum("xn,tn,sn->tsx", sines, shape, rec_lam)
    real_occ = thermal_x[None, :] + np.einsum("s,tsx->tx", p, np.abs(coh) ** 2)
    return mode_occ, np.asarray(x_grid, dtype=float), real_occ


def gate_report(spec, modes, psi0, target, times, want_concurrence=None, x_grid=None) -> GateReport:
    """Fidelity, entanglement and photon observables along a gate.

    ``target`` is the diagonal (or full diagonal matrix) of the ideal unitary
    applied to ``psi0``, or a callable t -> diagonal for time-dependent targets.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    psi0 = validate_pure(psi0)
    N = spec.n_qubits
    if want_concurrence is None:
        want_concurrence = N == 2
    elif want_concurrence and N != 2:
        raise UnsupportedObservableError("concurrence requires exactly two qubits")
    rhos = evolve_exact(spec, modes, psi0, times)
    fid = np.empty(times.size)
    ent = np.empty(times.size)
    conc = np.empty(times.size) if want_concurrence else None
    pur = np.empty(times.size)
    for k, t in enumerate(times):
        u = target(t) if callable(target) else target
        u = np.asarray(u)
        u = np.diag(u) if u.ndim == 2 else u
        fid[k] = fidelity_pure(rhos[k], u * psi0)
        ent[k] = von_neumann_entropy(rhos[k])
        pur[k] = float(np.real(np.vdot(rhos[k], rhos[k])))
        if want_concurrence:
            conc[k] = concurrence(rhos[k])
    p = np.abs(psi0) ** 2
    mode_occ, xs, real_occ = photon_observables(modes, p, times, x_grid, spec.length)
    total = mode_occ.sum(axis=1)
    return GateReport(
        times, fid, ent, conc, mode_occ, xs, real_occ, total, total - modes.thermal_occ.sum(), pur
    )


def gate_infidelity(spec, modes, psi0, times, J=None) -> np.ndarray:
    """1 - F(t) against the ideal evolution with the full phases at time t."""
    if J is None:
        J = coupling_matrix_modesum(modes)
    psi0 = validate_pure(psi0)
    rhos = evolve_exact(spec, modes, psi0, times)
    out = np.empty(len(rhos))
    for k, t in enumerate(np.atleast_1d(times)):
        tgt = target_state(spec, J, psi0, t)
        out[k] = 1.0 - np.vdot(tgt, rhos[k] @ tgt).real
    return out


@dataclass(frozen=True, eq=False)
class TimingScan:
    p_list: np.ndarray
    dt: np.ndarray
    error: np.ndarray
    fit_coefficient: np.ndarray
    multimode_reference: float
    single_mode_formula: np.ndarray


def fit_quadratic(dt, err) -> float:
    """Least-squares c in err = c * dt^2."""
    x = np.asarray(dt, dtype=float) ** 2
    return float(np.dot(x, err) / np.dot(x, x))


def single_mode_variances(modes: ModeSet, psi_target, mode=0):
    """Var(lambda) and Var(lambda^2) of lambda_n(s) in a target state."""
    p = np.abs(np.asarray(psi_target)) ** 2
    lam = spin_configurations(modes.n_qubits) @ modes.couplings[:, mode]
    m1 = p @ lam
    m2 = p @ lam**2
    m4 = p @ lam**4
    return m2 - m1**2, m4 - m2**2


def timing_error_scan(spec, modes, psi0, p_list, dt_grid) -> TimingScan:
    """Gate error around stroboscopic times t_p = p*tau for small offsets."""
    from .budget import timing_error_formula

    p_list = np.atleast_1d(np.asarray(p_list, dtype=int))
    dt = np.atleast_1d(np.asarray(dt_grid, dtype=float))
    J = coupling_matrix_modesum(modes)
    err = np.empty((p_list.size, dt.size))
    for a, p in enumerate(p_list):
        err[a] = gate_infidelity(spec, modes, psi0, p * spec.tau + dt, J)
    fit = np.array([fit_quadratic(dt, e) for e in err])
    w1 = spec.omega1
    ref = 4 * (spec.speed / spec.cutoff) ** 2 * J[0, 1] / w1 if spec.n_qubits > 1 else 0.0
    # single-mode reference with g normalized out: S_1 = lambda_1 / g
    g = float(np.max(np.abs(modes.couplings[:, 0]))) or 1.0
    nbar = float(modes.thermal_occ[0])
    formula = np.empty_like(err)
    for a, p in enumerate(p_list):
        tgt = target_state(spec, J, psi0, p * spec.tau)
        v1, v2 = single_mode_variances(modes, tgt)
        formula[a] = timing_error_formula(w1, dt, g, nbar, v1 / g**2, v2 / g**4)
    return TimingScan(p_list, dt, err, fit, ref, formula)


def nonlinear_modes(spec: NetworkSpec, epsilon: float, n_modes: int | None = None) -> ModeSet:
    from .dispersion import nonlinear_spectrum

    n = default_n_modes(spec) if n_modes is None else n_modes
    omega = nonlinear_spectrum(spec.omega1, epsilon, n)
    return build_mode_set(spec, n, omega=omega)


def _min_error(spec, modes, psi0, J, t_center, half_window, n_grid):
    ts = t_center + np.linspace(-half_window, half_window, n_grid)
    errs = gate_infidelity(spec, modes, psi0, ts, J)
    i = int(np.argmin(errs))
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, n_grid - 1)]
    res = minimize_scalar(
        lambda t: gate_infidelity(spec, modes, psi0, [t], J)[0],
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12 * max(1.0, t_center)},
    )
    if res.fun < errs[i]:
        return float(res.fun), float(res.x)
    return float(errs[i]), float(ts[i])


@dataclass(frozen=True, eq=False)
class DispersionScan:
    epsilon: np.ndarray
    p_star: np.ndarray
    min_error: np.ndarray
    t_opt: np.ndarray
    averaged_error: np.ndarray | None
    asynchronicity: np.ndarray
    regime: list
    saturated_estimate: np.ndarray


def classify_regime(async_phase: float) -> str:
    if async_phase < 0.5:
        return "perturbative"
    if async_phase > math.pi:
        return "saturated"
    return "crossover"


def nonlinear_dispersion_scan(
    spec: NetworkSpec,
    epsilon_list: Sequence[float],
    p_star_list: Sequence[int],
    n_modes: int | None = None,
    half_window: float = 0.5,
    n_grid: int = 401,
    n_average: int = 0,
) -> DispersionScan:
    """Minimal gate error near t_{p*} for the spectrum w_n = w1 n - eps w1 (n-1)^2.

    For each p* the couplings are set to g = w1/sqrt(8 p*) so that the gate
    is maximally entangling at p*; positions, cutoff and temperature come from
    ``spec``. ``half_window`` is in units of tau.

    With ``n_average > 0`` the minimal error is also averaged over
    ``n_average`` values of epsilon spread across one period 1/p* of the
    mode-2 dephasing phase. The bare minimum oscillates with eps*p* (it
    vanishes whenever eps*p* is an integer); the average tracks its envelope.
    """
    eps_arr = np.atleast_1d(np.asarray(epsilon_list, dtype=float))
    ps = np.atleast_1d(np.asarray(p_star_list, dtype=int))
    w1 = spec.omega1
    n_modes = default_n_modes(spec) if n_modes is None else n_modes
    shape = (eps_arr.size, ps.size)
    emin = np.empty(shape)
    topt = np.empty(shape)
    avg = np.empty(shape) if n_average else None
    asyn = np.empty(shape)
    sat = np.empty(shape)
    regimes = []
    psi0 = equatorial_state(spec.n_qubits)
    for b, p in enumerate(ps):
        g = w1 / math.sqrt(8 * p)
        scaled = _with_couplings(spec, g)
        for a, eps in enumerate(eps_arr):
            modes = nonlinear_modes(scaled, eps, n_modes)
            J = coupling_matrix_modesum(modes)
            emin[a, b], topt[a, b] = _min_error(
                scaled, modes, psi0, J, p * spec.tau, half_window * spec.tau, n_grid
            )
            asyn[a, b] = eps * w1 * p * spec.tau
            regimes.append(classify_regime(asyn[a, b]))
            if n_modes >= 2:
                var2, _ = single_mode_variances(modes, psi0, mode=1)
                sat[a, b] = math.pi**2 * var2 / modes.omega[1] ** 2
            else:
                sat[a, b] = 0.0
            if n_average:
                vals = []
                for j in range(n_average):
                    e2 = eps + (j + 0.5) / (n_average * p)
                    m2 = nonlinear_modes(scaled, e2, n_modes)
                    vals.append(
                        _min_error(
                            scaled, m2, psi0, coupling_matrix_modesum(m2), p * spec.tau,
                            half_window * spec.tau, n_grid,
                        )[0]
                    )
                avg[a, b] = float(np.mean(vals))
    return DispersionScan(eps_arr, ps, emin, topt, avg, asyn, regimes, sat)


def _with_couplings(spec: NetworkSpec, g: float) -> NetworkSpec:
    from dataclasses import replace

    qubits = tuple(replace(q, coupling=g) for q in spec.qubits)
    return replace(spec, qubits=qubits)


def commensurability_time(freq_ratios, omega1: float = 1.0):
    """Smallest t > 0 with w_n t in 2 pi Z for all n, or None.

    Ratios w_n / w_1 must be exact rationals (``Fraction``, ``int`` or a
    ``"p/q"`` string). A float or ``None`` entry marks an irrational ratio.
    """
    ratios = list(freq_ratios)
    if not ratios:
        raise ValueError("need at least one frequency ratio")
    lcm = 1
    for r in ratios:
        if isinstance(r, bool) or r is None or isinstance(r, float):
            return None
        try:
            fr = Fraction(r)
        except (TypeError, ValueError):
            return None
        if fr <= 0:
            raise ValueError("frequency ratios must be positive")
        lcm = math.lcm(lcm, fr.denominator)
    return 2 * math.pi * lcm / omega1


def fidelity_trace(spec, modes, psi0, target_diag, times) -> np.ndarray:
    psi0 = validate_pure(psi0)
    tgt = np.asarray(target_diag) * psi0
    rhos = evolve_exact(spec, modes, psi0, times)
    return np.array([fidelity_pure(r, tgt) for r in rhos])


def standard_gate_setup(temperature=0.0, cutoff=0.03, n_modes=30, calibrate=True):
    """Two-qubit hot-gate network, modes and initial state (omega1 = 1).

    With ``calibrate`` the couplings are rescaled so the truncated mode sum
    gives exactly J = omega1/8, i.e. a pi/4 phase at t = tau.
    """
    spec = NetworkSpec.two_qubit_gate(cutoff=cutoff, temperature=temperature)
    modes = build_mode_set(spec, n_modes)
    if calibrate:
        modes = calibrate_pair(modes, spec.omega1 / 8)
    return spec, modes, equatorial_state(2)

