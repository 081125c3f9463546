"""Line geometry, photon modes and photon-mediated Ising couplings.

Units: hbar = k_B = 1. Frequencies are angular, temperature is k_B*T in
the same units, and lengths and speeds are in arbitrary consistent units.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np


class ConfigurationError(ValueError):
    """Raised when a physical configuration is inconsistent."""


class SingularFrameError(ConfigurationError):
    """A driven mode has zero detuning but nonzero amplitude."""


class UltraStrongCouplingWarning(UserWarning):
    """Some |g_{i,n}| reaches the mode frequency. The closed form still holds."""


class StrongDriveWarning(UserWarning):
    """Modulation amplitude is not small compared to the drive frequency."""


class CouplingProfile(Protocol):
    """Spatial shape f(x - x_i) of a qubit's contact with the line.

    Profiles are normalized so that their integral over the line is 1.
    """

    width: float

    def mode_overlap(self, k: np.ndarray, x: float) -> np.ndarray:
        """Integral of cos(k y) f(y - x) dy for each wavevector in ``k``."""

    def pair_overlap(self, x_i: float, x_j: float) -> float:
        """Integral of f(y - x_i) f(y - x_j) dy."""


@dataclass(frozen=True)
class BoxProfile:
    """Uniform contact over [x, x + width]."""

    width: float

    def mode_overlap(self, k, x):
        k = np.asarray(k, dtype=float)
        a = self.width
        return (np.sin(k * (x + a)) - np.sin(k * x)) / (k * a)

    def pair_overlap(self, x_i, x_j):
        a = self.width
        return max(0.0, a - abs(x_i - x_j)) / a**2


@dataclass(frozen=True)
class QubitSpec:
    position: float
    frequency: float = 0.0
    coupling: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.position) and math.isfinite(self.frequency)):
            raise ConfigurationError("qubit position and frequency must be finite")
        if self.frequency < 0:
            raise ConfigurationError(f"qubit frequency must be >= 0, got {self.frequency}")
        if not math.isfinite(self.coupling):
            raise ConfigurationError("qubit coupling must be finite")


@dataclass(frozen=True)
class NetworkSpec:
    """Transmission line of length ``length`` with qubits attached along it.

    ``temperature`` is k_B*T in frequency units.
    """

    length: float
    speed: float
    cutoff: float
    temperature: float
    qubits: tuple[QubitSpec, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if not self.length > 0:
            raise ConfigurationError(f"line length must be positive, got {self.length}")
        if not self.speed > 0:
            raise ConfigurationError(f"propagation speed must be positive, got {self.speed}")
        if not 0 < self.cutoff < self.length:
            raise ConfigurationError(
                f"cutoff must satisfy 0 < a < L, got a={self.cutoff}, L={self.length}"
            )
        if not self.temperature >= 0:
            raise ConfigurationError(f"temperature must be >= 0, got {self.temperature}")
        tol = 1e-12 * self.length
        for i, q in enumerate(self.qubits):
            if q.position < -tol or q.position + self.cutoff > self.length + tol:
                raise ConfigurationError(
                    f"qubit {i} at x={q.position} with a={self.cutoff} does not fit on [0, {self.length}]"
                )

    @property
    def omega1(self) -> float:
        return math.pi * self.speed / self.length

    @property
    def tau(self) -> float:
        """Round-trip time 2L/c."""
        return 2 * math.pi / self.omega1

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    @property
    def positions(self) -> np.ndarray:
        return np.array([q.position for q in self.qubits], dtype=float)

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([q.frequency for q in self.qubits], dtype=float)

    @property
    def couplings(self) -> np.ndarray:
        return np.array([q.coupling for q in self.qubits], dtype=float)

    @property
    def profile(self) -> BoxProfile:
        return BoxProfile(self.cutoff)

    @classmethod
    def two_qubit_gate(cls, cutoff=0.03, temperature=0.0, g=None, length=1.0, speed=None):
        """Two qubits at opposite ends of the line, in units where omega1 = 1.

        ``cutoff`` is in units of L and ``temperature`` in units of omega1.
        The default coupling g = omega1/sqrt(8) gives J*tau = pi/4.
        """
        if speed is None:
            speed = length / math.pi
        w1 = math.pi * speed / length
        if g is None:
            g = w1 / math.sqrt(8)
        a = cutoff * length
        qubits = (QubitSpec(0.0, 0.0, g), QubitSpec(length - a, 0.0, g))
        return cls(length, speed, a, temperature * w1, qubits)


def bose_occupation(omega, temperature):
    """Thermal photon number; exact vacuum at T = 0."""
    omega = np.asarray(omega, dtype=float)
    if temperature == 0:
        return np.zeros_like(omega)
    with np.errstate(over="ignore"):
        return 1.0 / np.expm1(omega / temperature)


@dataclass(frozen=True, eq=False)
class ModeSet:
    """Discrete photon modes with their couplings to each qubit.

    ``couplings`` has shape (n_qubits, n_modes).
    """

    omega: np.ndarray
    k: np.ndarray
    couplings: np.ndarray
    thermal_occ: np.ndarray

    def __post_init__(self):
        for name in ("omega", "k", "couplings", "thermal_occ"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.omega.shape[0]
        if self.k.shape != (n,) or self.thermal_occ.shape != (n,):
            raise ConfigurationError("omega, k and thermal_occ must have equal length")
        if self.couplings.ndim != 2 or self.couplings.shape[1] != n:
            raise ConfigurationError("couplings must have shape (n_qubits, n_modes)")
        for name in ("omega", "k", "couplings", "thermal_occ"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ConfigurationError(f"{name} contains non-finite entries")

    @property
    def n_modes(self) -> int:
        return self.omega.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.couplings.shape[0]

    def subset(self, indices) -> "ModeSet":
        idx = np.asarray(indices, dtype=int)
        return ModeSet(self.omega[idx], self.k[idx], self.couplings[:, idx], self.thermal_occ[idx])

    def scaled(self, factor: float) -> "ModeSet":
        return ModeSet(self.omega, self.k, self.couplings * factor, self.thermal_occ)


def default_n_modes(spec: NetworkSpec) -> int:
    """Smallest n with omega_n * a / c >= 4 pi, i.e. n >= 4 L / a."""
    return int(math.ceil(4 * spec.length / spec.cutoff - 1e-9))


def box_couplings(spec: NetworkSpec, n: np.ndarray) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    k = n * math.pi / spec.length
    rows = [q.coupling * np.sqrt(n) * spec.profile.mode_overlap(k, q.position) for q in spec.qubits]
    return np.array(rows, dtype=float).reshape(spec.n_qubits, len(n))


def build_mode_set(spec: NetworkSpec, n_modes: int | None = None, omega=None) -> ModeSet:
    """Modes n = 1..n_modes with box-profile couplings.

    ``omega`` replaces the linear spectrum n*omega1 (for dispersion studies);
    wavevectors and couplings keep the ideal-line form nπ/L.
    """
    if n_modes is None:
        n_modes = default_n_modes(spec) if omega is None else len(omega)
    if n_modes < 1:
        raise ConfigurationError("n_modes must be >= 1")
    n = np.arange(1, n_modes + 1)
    k = n * math.pi / spec.length
    if omega is None:
        omega = n * spec.omega1
    else:
        omega = np.asarray(omega, dtype=float)
        if omega.shape != (n_modes,):
            raise ConfigurationError("omega must have one entry per mode")
        if np.any(omega <= 0):
            raise ConfigurationError("all mode frequencies must be positive")
    g = box_couplings(spec, n)
    if g.size and np.any(np.abs(g) >= omega):
        warnings.warn("coupling reaches the mode frequency (ultra-strong regime)", UltraStrongCouplingWarning)
    return ModeSet(omega, k, g, bose_occupation(omega, spec.temperature))


def coupling_matrix_modesum(modes: ModeSet) -> np.ndarray:
    """J_ij = -2 sum_n g_in g_jn / omega_n with the diagonal set to zero."""
    g = modes.couplings
    J = -2.0 * (g / modes.omega) @ g.T
    J = 0.5 * (J + J.T)
    np.fill_diagonal(J, 0.0)
    return J


def coupling_matrix_closed_form(spec: NetworkSpec) -> np.ndarray:
    """Infinite-mode limit J_ij = (g_i g_j / omega1) (1 - L * overlap_ij).

    The overlap term vanishes for profiles that do not touch.
    """
    N = spec.n_qubits
    g = spec.couplings
    x = spec.positions
    J = np.zeros((N, N))
    for i in range(N):
        for j in range(i + 1, N):
            ov = spec.profile.pair_overlap(x[i], x[j])
            J[i, j] = J[j, i] = g[i] * g[j] / spec.omega1 * (1.0 - spec.length * ov)
    return J


@dataclass(frozen=True, eq=False)
class DriveFrame:
    """Parametric modulation g_{i,n}(t) = A_{i,n} cos(Omega_n t)."""

    drive_freqs: np.ndarray
    amplitudes: np.ndarray
    detunings: np.ndarray
    max_ratio: float = 0.1

    def __post_init__(self):
        for name in ("drive_freqs", "amplitudes", "detunings"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.drive_freqs.shape[0]
        if self.detunings.shape != (n,) or self.amplitudes.ndim != 2 or self.amplitudes.shape[1] != n:
            raise ConfigurationError("drive frame arrays have inconsistent shapes")
        ratio = np.abs(self.amplitudes) / np.abs(self.drive_freqs)
        if np.any(ratio > self.max_ratio):
            warnings.warn(
                f"modulation amplitude exceeds {self.max_ratio} of the drive frequency", StrongDriveWarning
            )

    @classmethod
    def from_modes(cls, modes_omega, drive_freqs, amplitudes, max_ratio=0.1):
        omega = np.asarray(modes_omega, dtype=float)
        drive = np.asarray(drive_freqs, dtype=float)
        return cls(drive, amplitudes, omega - drive, max_ratio)


def modulated_frame(spec: NetworkSpec, frame: DriveFrame) -> ModeSet:
    """Effective static model in the frame co-rotating with the drives.

    Mode n gets frequency Delta_n and couplings A_{i,n}/2. Undriven modes
    are dropped. Thermal occupations refer to the lab frequency Omega_n + Delta_n.
    """
    A = frame.amplitudes
    if A.shape[0] != spec.n_qubits:
        raise ConfigurationError("amplitude rows must match the number of qubits")
    active = np.any(A != 0, axis=0)
    if np.any(active & (frame.detunings == 0)):
        raise SingularFrameError("zero detuning on a driven mode")
    idx = np.flatnonzero(active)
    lab = frame.drive_freqs[idx] + frame.detunings[idx]
    k = (idx + 1) * math.pi / spec.length
    return ModeSet(
        frame.detunings[idx], k, A[:, idx] / 2.0, bose_occupation(np.abs(lab), spec.temperature)
    )


def spin_configurations(n_qubits: int) -> np.ndarray:
    """Rows s in {+1,-1}^N for basis index z; qubit 0 is the most significant bit, bit 0 maps to +1."""
    z = np.arange(2**n_qubits)[:, None]
    shifts = np.arange(n_qubits - 1, -1, -1)[None, :]
    return 1 - 2 * ((z >> shifts) & 1)


def is_symmetric(J: np.ndarray, tol: float = 0.0) -> bool:
    return bool(np.all(np.abs(J - J.T) <= tol))


def qubits_from_arrays(positions: Sequence[float], frequencies=None, couplings=None) -> tuple[QubitSpec, ...]:
    n = len(positions)
    freqs = np.zeros(n) if frequencies is None else frequencies
    gs = np.zeros(n) if couplings is None else couplings
    return tuple(QubitSpec(float(x), float(w), float(g)) for x, w, g in zip(positions, freqs, gs))
