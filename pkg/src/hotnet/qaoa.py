"""QAOA for Max-Cut with cost phases realized by a single detuned mode.

Cost: H_C(z) = (1/2) s^T W s with W = A + d I, so H_C = 2 (|E| - cut) for
unit-weight d-regular graphs. The cost layer exp(-i gamma H_C) is
compiled into stroboscopic cycles of the single-mode model; each cycle
imprints phases lambda_s^2 t / Delta_eff with lambda_s = sum_i g_i s_i.
The mixer is exp(-i beta sum_i X_i) and the initial state is |-,...,->.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .compiler import TargetModel, compile_schedule
from .core import ConfigurationError, spin_configurations
from .lindblad import (
    CycleDiagnostics,
    IntegrationError,
    JointState,
    NoiseModel,
    default_fock_cutoff,
    evolve_cycle,
    thermal_state,
)

ENUMERATION_LIMIT = 20


class EnumerationLimitError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class QaoaConfig:
    graph: TargetModel
    gammas: tuple = ()
    betas: tuple = ()
    J_max: float = 0.02
    detuning_Delta: float = -1.0
    omega0: float = 1.0

    def __post_init__(self):
        if len(self.gammas) != len(self.betas):
            raise ConfigurationError("gammas and betas must have equal length")
        if self.J_max <= 0:
            raise ConfigurationError("J_max must be positive")
        if self.detuning_Delta == 0:
            raise ConfigurationError("detuning must be nonzero")
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))

    @property
    def depth_M(self) -> int:
        return len(self.gammas)

    @property
    def gamma_bar(self) -> float:
        return float(np.mean(self.gammas)) if self.gammas else 0.0

    def with_angles(self, gammas, betas) -> "QaoaConfig":
        return QaoaConfig(self.graph, tuple(gammas), tuple(betas), self.J_max, self.detuning_Delta, self.omega0)


@dataclass
class QaoaResult:
    energy: float
    gammas: np.ndarray
    betas: np.ndarray
    best_string: str
    cut_value: float
    samples: dict
    angle_trace: list = field(default_factory=list)
    n_evaluations: int = 0
    improved: bool = True


def cost_hamiltonian(graph: TargetModel) -> np.ndarray:
    """Diagonal of H_C over basis index z (qubit 0 is the most significant bit)."""
    s = spin_configurations(graph.n).astype(float)
    return 0.5 * np.einsum("zi,ij,zj->z", s, graph.w, s)


def exact_minimum(graph: TargetModel) -> tuple[float, list[int]]:
    if graph.n > ENUMERATION_LIMIT:
        raise EnumerationLimitError(f"exhaustive minimum limited to N <= {ENUMERATION_LIMIT}")
    h = cost_hamiltonian(graph)
    m = float(h.min())
    return m, [int(z) for z in np.flatnonzero(np.isclose(h, m, rtol=0, atol=1e-9))]


def bitstring(z: int, n: int) -> str:
    return format(int(z), f"0{n}b")


def cut_value(graph: TargetModel, z) -> float:
    bits = np.array([int(c) for c in z]) if isinstance(z, str) else (int(z) >> np.arange(graph.n - 1, -1, -1)) & 1
    A = graph.off_diagonal()
    return float(0.5 * np.sum(A * (bits[:, None] != bits[None, :])))


def initial_state(n: int) -> np.ndarray:
    minus = np.array([1.0, -1.0]) / math.sqrt(2)
    psi = np.array([1.0 + 0j])
    for _ in range(n):
        psi = np.kron(psi, minus)
    return psi


def mixer_single(beta: float) -> np.ndarray:
    c, s = math.cos(beta), math.sin(beta)
    return np.array([[c, -1j * s], [-1j * s, c]])


def mixer_unitary(beta: float, n: int) -> np.ndarray:
    u = mixer_single(beta)
    out = np.array([[1.0 + 0j]])
    for _ in range(n):
        out = np.kron(out, u)
    return out


def apply_mixer(psi, beta, n):
    u = mixer_single(beta)
    t = psi.reshape([2] * n)
    for q in range(n):
        t = np.moveaxis(np.tensordot(u, t, axes=(1, q)), 0, q)
    return t.reshape(-1)


def prepare_state_ideal(config: QaoaConfig, cost=None) -> np.ndarray:
    n = config.graph.n
    h = cost_hamiltonian(config.graph) if cost is None else cost
    psi = initial_state(n)
    for g, b in zip(config.gammas, config.betas):
        psi = apply_mixer(np.exp(-1j * g * h) * psi, b, n)
    return psi


def compile_layer(config: QaoaConfig, gamma: float):
    """Cycle schedule realizing exp(-i gamma H_C) up to a global phase.

    The accumulated phase matrix is gamma W / 2 with per-pair coupling
    2 g_i g_j / |Delta| bounded by J_max. Cycles run at detuning -|Delta|;
    a cost matrix with negative eigenvalues uses the opposite detuning sign
    for those cycles.
    """
    if gamma == 0:
        return []
    target = TargetModel(abs(gamma) * config.graph.w / 2)
    sched = compile_schedule(target, abs(config.detuning_Delta), config.J_max / 2, math.inf, "signed")
    sgn = 1 if gamma > 0 else -1
    return [(c.amplitudes, c.duration, -sgn * c.sign * abs(config.detuning_Delta)) for c in sched.cycles]


def run_time(config: QaoaConfig) -> float:
    return float(sum(d for g in config.gammas for _, d, _ in compile_layer(config, g)))


@dataclass
class NoisyRun:
    rho: np.ndarray
    diagnostics: CycleDiagnostics
    fock_cutoff: int
    duration: float


def prepare_state_noisy(config: QaoaConfig, noise: NoiseModel, steps_per_period=2, force_integrator=False,
                        trace_tol=1e-6) -> NoisyRun:
    """Spin density matrix after the noisy circuit, oscillator traced out.

    Without damping (kappa = 0) the stroboscopic cycles act on the spins as
    exact phases and the oscillator is not simulated, unless
    ``force_integrator`` is set.
    """
    n = config.graph.n
    layers = [compile_layer(config, g) for g in config.gammas]
    psi0 = initial_state(n)
    rho = np.outer(psi0, psi0.conj())
    diag = CycleDiagnostics()
    total = 0.0
    use_osc = noise.kappa > 0 or force_integrator
    if use_osc:
        s = spin_configurations(n)
        max_disp = max((np.abs(s @ a).max() * 2 / abs(D) for layer in layers for a, _, D in layer), default=0.0)
        F = noise.fock_cutoff or default_fock_cutoff(noise.nbar_th, max_disp)
        state = JointState.product(rho, thermal_state(noise.nbar_th, F))
        cache: dict = {}
    else:
        F = 0
        s = spin_configurations(n)
        ham = 0.5 * (n - s @ s.T)
    for layer, beta in zip(layers, config.betas):
        for amps, dur, D in layer:
            total += dur
            if use_osc:
                evolve_cycle(state, amps, dur, D, noise, steps_per_period, diag, cache)
                if diag.max_trace_drift > trace_tol:
                    raise IntegrationError(f"trace drift {diag.max_trace_drift:.2e} exceeds {trace_tol:g}")
            else:
                lam = s @ amps
                ph = np.exp(1j * lam**2 * dur / D)
                rho = ph[:, None] * rho * ph.conj()[None, :]
                if noise.gamma_phi > 0:
                    rho = rho * np.exp(-noise.gamma_phi * dur * ham)
        U = mixer_unitary(beta, n)
        if use_osc:
            state.apply_spin_unitary(U)
        else:
            rho = U @ rho @ U.conj().T
    if use_osc:
        rho = state.spin_state()
        diag.max_trace_drift = max(diag.max_trace_drift, abs(np.trace(rho).real - 1))
    rho = 0.5 * (rho + rho.conj().T)
    diag.min_eigenvalue = float(np.linalg.eigvalsh(rho).min())
    return NoisyRun(rho, diag, F, total)


def energy_of(state, cost) -> float:
    st = np.asarray(state)
    p = np.abs(st) ** 2 if st.ndim == 1 else np.real(np.diag(st))
    return float(p @ cost)


def sample_strings(state, shots: int, seed: int, n_qubits: int | None = None) -> dict:
    """Histogram {bitstring: count} drawn from the computational-basis populations."""
    st = np.asarray(state)
    p = np.abs(st) ** 2 if st.ndim == 1 else np.real(np.diag(st))
    p = np.clip(p, 0, None)
    p = p / p.sum()
    n = n_qubits or int(round(math.log2(p.size)))
    counts = np.random.default_rng(seed).multinomial(shots, p)
    return {bitstring(z, n): int(c) for z, c in enumerate(counts) if c}


def modal_string(samples: dict) -> str:
    return max(sorted(samples), key=lambda k: samples[k])


def _wrap(x, M):
    g = np.mod(x[:M], 2 * math.pi)
    b = np.mod(x[M:], math.pi)
    return g, b


def optimize_angles(config: QaoaConfig, M: int, evaluator=None, restarts=6, seed=0, warm_start=None,
                    maxfev=4000, shots=4096, xatol=1e-7, fatol=1e-10) -> QaoaResult:
    """Minimize <H_C> over (gamma, beta) with multi-start Nelder-Mead.

    ``evaluator(config) -> state`` defaults to the ideal preparation.
    ``warm_start`` is an (gammas, betas) pair from a shallower circuit; it
    is padded with an identity layer so the result never gets worse than
    the warm start.
    """
    if M < 1:
        raise ConfigurationError("depth M must be >= 1")
    cost = cost_hamiltonian(config.graph)
    if evaluator is None:
        def evaluator(cfg):
            return prepare_state_ideal(cfg, cost)
    rng = np.random.default_rng(seed)
    trace = []
    best = [math.inf, None]
    count = [0]

    def f(x):
        count[0] += 1
        g, b = _wrap(x, M)
        e = energy_of(evaluator(config.with_angles(g, b)), cost)
        if e < best[0]:
            best[0], best[1] = e, np.concatenate([g, b])
        trace.append(best[0])
        return e

    starts = []
    if warm_start is not None:
        g0, b0 = (np.asarray(v, dtype=float) for v in warm_start)
        pad = M - g0.size
        starts.append(np.concatenate([g0, np.zeros(pad), b0, np.zeros(pad)]))
        if g0.size:
            # linear interpolation of the shallower schedule to M layers
            u_old = np.linspace(0, 1, g0.size)
            u_new = np.linspace(0, 1, M)
            starts.append(np.concatenate([np.interp(u_new, u_old, g0), np.interp(u_new, u_old, b0)]))
    while len(starts) < restarts:
        starts.append(np.concatenate([rng.uniform(0, 0.5 * math.pi, M), rng.uniform(0, 0.5 * math.pi, M)]))
    before = None
    for k, x0 in enumerate(starts):
        f(x0)
        if k == 0:
            before = best[0]
        minimize(f, x0, method="Nelder-Mead",
                 options={"maxfev": maxfev, "xatol": xatol, "fatol": fatol, "adaptive": True})
    g, b = best[1][:M], best[1][M:]
    final = evaluator(config.with_angles(g, b))
    samples = sample_strings(final, shots, seed, config.graph.n)
    top = modal_string(samples)
    return QaoaResult(best[0], g, b, top, cut_value(config.graph, top), samples, trace, count[0],
                      improved=best[0] < before - 1e-12)


def optimize_nested(config: QaoaConfig, M_max: int, evaluator=None, restarts=6, seed=0, **kw) -> list[QaoaResult]:
    """Optimize depths 1..M_max, each warm-started from the previous depth."""
    out = []
    warm = None
    for M in range(1, M_max + 1):
        r = optimize_angles(config, M, evaluator, restarts, seed + M, warm, **kw)
        out.append(r)
        warm = (r.gammas, r.betas)
    return out


@dataclass(frozen=True)
class ScalingPoint:
    graph: str
    N: int
    d: int
    M: int
    ratio: float
    nbar: float
    rate: float
    x: float
    error: float
    gamma_bar: float


def predicted_abscissa(kind, rate, nbar, J_max, Delta, gamma_bar, M, N, d) -> float:
    if kind == "dephasing":
        return rate * N / J_max * gamma_bar * M * N * d
    return rate * (1 + 2 * nbar) / abs(Delta) * gamma_bar * M * N * d


def error_scaling_experiment(graphs, M_list, ratios, noise_kind, x_targets=(0.05, 0.15), nbars=(0.0,),
                             Delta=-1.0, angles=None, restarts=6, seed=0, steps_per_period=2,
                             executor=None) -> list[ScalingPoint]:
    """Infidelity of the noisy state against the ideal optimized state.

    ``graphs`` is a list of (label, TargetModel, d). For each point the
    noise rate is chosen so the predicted abscissa equals each entry of
    ``x_targets``. ``angles`` may map (label, M) to (gammas, betas);
    missing entries are optimized on the ideal path.
    """
    if noise_kind not in ("dephasing", "rethermalization"):
        raise ConfigurationError(f"unknown noise kind {noise_kind!r}")
    angles = dict(angles or {})
    jobs = []
    for label, graph, d in graphs:
        base = QaoaConfig(graph, J_max=1.0, detuning_Delta=Delta)
        M_needed = [M for M in M_list if (label, M) not in angles]
        if M_needed:
            for r in optimize_nested(base, max(M_needed), restarts=restarts, seed=seed):
                angles.setdefault((label, len(r.gammas)), (r.gammas, r.betas))
        for M in M_list:
            g, b = angles[(label, M)]
            for ratio in ratios:
                cfg = QaoaConfig(graph, tuple(g), tuple(b), ratio * abs(Delta), Delta)
                psi = prepare_state_ideal(cfg)
                for nbar in (nbars if noise_kind == "rethermalization" else (0.0,)):
                    for x in x_targets:
                        unit = predicted_abscissa(noise_kind, 1.0, nbar, cfg.J_max, Delta, cfg.gamma_bar, M, graph.n, d)
                        rate = x / unit
                        noise = (NoiseModel(gamma_phi=rate) if noise_kind == "dephasing"
                                 else NoiseModel(kappa=rate, nbar_th=nbar))
                        jobs.append((label, d, M, ratio, nbar, rate, x, cfg, psi, noise))

    def run(job):
        label, d, M, ratio, nbar, rate, x, cfg, psi, noise = job
        rho = prepare_state_noisy(cfg, noise, steps_per_period).rho
        err = 1 - float(np.real(np.vdot(psi, rho @ psi)))
        return ScalingPoint(label, cfg.graph.n, d, M, ratio, nbar, rate, x, err, cfg.gamma_bar)

    mapper = executor.map if executor is not None else map
    return list(mapper(run, jobs))


def fit_slope(points) -> float:
    """Least-squares slope through the origin of error versus x."""
    x = np.array([p.x for p in points])
    y = np.array([p.error for p in points])
    return float(x @ y / (x @ x))
