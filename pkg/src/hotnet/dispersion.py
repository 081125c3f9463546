"""Mode structure of a line terminated by inductive and capacitive elements.

With boundary lengths a1 (inductive) and a2 (capacitive), mode n has
wavevector k_n = (n pi + 2 theta_n)/L where theta_n solves
k a1 = (1 + a1 a2 k^2) tan(theta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import ConfigurationError

EDGE = 1e-9


class BracketError(RuntimeError):
    pass


@dataclass(frozen=True)
class BoundarySpec:
    a1: float
    a2: float
    L: float
    epsilon_nl: float = 0.0

    def __post_init__(self):
        if self.a1 < 0 or self.a2 < 0:
            raise ConfigurationError("boundary lengths must be nonnegative")
        if not self.L > 0:
            raise ConfigurationError("line length must be positive")


@dataclass(frozen=True, eq=False)
class ModeTable:
    n: np.ndarray
    k: np.ndarray
    theta: np.ndarray
    residual_tan: np.ndarray
    residual_k: np.ndarray


def _wavevector(n, theta, L):
    return (n * math.pi + 2 * theta) / L


def _tan_residual(theta, n, spec):
    k = _wavevector(n, theta, spec.L)
    return k * spec.a1 - (1 + spec.a1 * spec.a2 * k * k) * math.tan(theta)


def solve_mode(spec: BoundarySpec, n: int) -> tuple[float, float]:
    """(k_n, theta_n) for a single mode index n >= 1."""
    if spec.a1 == 0:
        return n * math.pi / spec.L, 0.0
    lo, hi = 0.0, math.pi / 2 - EDGE
    f_lo, f_hi = _tan_residual(lo, n, spec), _tan_residual(hi, n, spec)
    if not (f_lo > 0 > f_hi):
        raise BracketError(
            f"mode {n}: no sign change on [0, pi/2): f(0)={f_lo:.3g}, f(pi/2-)={f_hi:.3g}"
        )
    theta = brentq(_tan_residual, lo, hi, args=(n, spec), xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)
    return _wavevector(n, theta, spec.L), theta


def solve_modes(spec: BoundarySpec, n_modes: int) -> ModeTable:
    if n_modes < 1:
        raise ConfigurationError("n_modes must be >= 1")
    ns = np.arange(1, n_modes + 1)
    k = np.empty(n_modes)
    th = np.empty(n_modes)
    for j, n in enumerate(ns):
        k[j], th[j] = solve_mode(spec, int(n))
    r1 = np.array([_tan_residual(t, n, spec) for t, n in zip(th, ns)])
    r2 = k - _wavevector(ns, th, spec.L)
    return ModeTable(ns, k, th, r1, r2)


def low_frequency_asymptote(n, spec: BoundarySpec):
    return math.pi * np.asarray(n) / (spec.L - 2 * spec.a1)


def high_frequency_asymptote(n, spec: BoundarySpec):
    return (np.asarray(n) + 1) * math.pi / spec.L


def nonlinear_spectrum(omega1: float, epsilon: float, n_modes: int) -> np.ndarray:
    """w_n = w1 n - eps w1 (n - 1)^2 for n = 1..n_modes."""
    n = np.arange(1, n_modes + 1)
    w = omega1 * n - epsilon * omega1 * (n - 1) ** 2
    if np.any(w <= 0):
        raise ConfigurationError(f"epsilon={epsilon} makes some of the {n_modes} mode frequencies nonpositive")
    return w
