import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from hotnet import budget as bd
from hotnet import dispersion as ds
from hotnet.core import ConfigurationError
from hotnet.scenarios import quoted_match

# ---------------------------------------------------------------- error budget

positive = st.floats(1e-3, 1e3)


@given(g=positive, gp=positive, k=positive, N=st.integers(2, 60), M=st.integers(1, 10),
       d=st.integers(1, 8), gb=st.floats(0.1, 2.0))
def test_compact_formula_is_optimum_over_detuning(g, gp, k, N, M, d, gb):
    res = minimize_scalar(lambda lg: bd.qaoa_total_error(math.exp(lg), g, gp, k, gb, M, N, d),
                          bounds=(-30, 30), method="bounded", options={"xatol": 1e-10})
    C = bd.cooperativity(g, gp, k)
    assert res.fun == pytest.approx(bd.qaoa_error(gb, d, M, N, C), rel=1e-6)
    D = bd.optimal_detuning(g, gp, k, N)
    assert bd.qaoa_total_error(D, g, gp, k, gb, M, N, d) == pytest.approx(bd.qaoa_error(gb, d, M, N, C), rel=1e-12)


@given(g=positive, gp=positive, T=positive, Q=st.floats(10, 1e7))
def test_cooperativity_optimum_minimizes_two_qubit_error(g, gp, T, Q):
    opt = bd.cooperativity_optimum(g, gp, T, Q)
    at = bd.two_qubit_error(opt.omega1_star, g, gp, T, Q)
    assert at == pytest.approx(opt.xi_opt, rel=1e-12)
    for f in (0.5, 2.0):
        assert bd.two_qubit_error(f * opt.omega1_star, g, gp, T, Q) > at


def test_cooperativity_worked_range():
    g = 2 * math.pi * 1e7
    kT = bd.thermal_energy(1.0)
    Cs = [bd.cooperativity_optimum(g, 2 * math.pi * gp, kT, 1e5).C for gp in (1e2, 1e5)]
    assert quoted_match(Cs[1], 5e3) and quoted_match(Cs[0], 5e6)


def test_superconducting_fixture():
    g = 2 * math.pi * 60e6
    keff = 2 * math.pi * 50e3 * 7
    C = bd.cooperativity(g, 1 / 100e-6, keff)
    assert quoted_match(C, 6e6)
    assert bd.qaoa_error(0.5, 2, 5, 12, C) == pytest.approx(0.08, abs=0.01)


def test_quoted_match_precision():
    assert quoted_match(4.80e3, 5e3) and quoted_match(0.0443, 0.043)
    assert not quoted_match(0.0460, 0.043)
    assert quoted_match(0.0014, 0.001) and not quoted_match(0.003, 0.001)


def test_rethermalization_and_dephasing_forms():
    assert bd.rethermalization_error(0.01, 0.5, -2.0, 0.5, 3, 4, 3) == pytest.approx(0.01 * 2 / 2 * 18)
    psi = np.array([1, 0, 0, 0], complex)
    assert bd.dephasing_error(2, 0.1, 0.1, psi) == 0.0
    assert bd.dephasing_error(2, 0.1, 0.1) == pytest.approx(0.01)
    with pytest.raises(bd.BudgetError):
        bd.rethermalization_error(0.1, 0.1, 0.0, 1, 1, 1, 1)
    with pytest.warns(RuntimeWarning):
        bd.dephasing_error(2, 1.0, 1.0)


def test_feasibility_inverts_error():
    C, gb, d = 6.46e6, 0.5, 2
    rows_N, rows_M = bd.feasibility_table(gb, d, C, 0.1, [5], [12])
    assert bd.qaoa_error(gb, d, 5, rows_N[0][1], C) == pytest.approx(0.1)
    assert bd.qaoa_error(gb, d, rows_M[0][1], 12, C) == pytest.approx(0.1)


def test_timing_formula_validity():
    assert bd.timing_formula_valid(1.0, 0.01, 0.0)
    assert not bd.timing_formula_valid(1.0, 0.05, 5.0)


# ---------------------------------------------------------------- dispersion

def test_ideal_line_without_inductor():
    tab = ds.solve_modes(ds.BoundarySpec(0.0, 0.0, 1.0), 10)
    assert np.allclose(tab.k, np.arange(1, 11) * math.pi)


@given(a1=st.floats(1e-3, 0.3), a2=st.floats(0, 0.05))
def test_residuals_and_ordering(a1, a2):
    spec = ds.BoundarySpec(a1, a2, 1.0)
    tab = ds.solve_modes(spec, 40)
    assert np.max(np.abs(tab.residual_tan) / tab.k) < 1e-12
    assert np.all(np.diff(tab.k) > 0)
    assert np.all((tab.theta >= 0) & (tab.theta < math.pi / 2))


def test_asymptotes():
    spec = ds.BoundarySpec(0.05, 0.0, 1.0)
    tab = ds.solve_modes(spec, 60)
    low = ds.low_frequency_asymptote(tab.n, spec)
    high = ds.high_frequency_asymptote(tab.n, spec)
    assert np.max(np.abs(low[:3] / tab.k[:3] - 1)) <= 0.01
    assert np.max(np.abs(high[29:] / tab.k[29:] - 1)) <= 0.01
    # the crossover: low-frequency form degrades with n, high-frequency form improves
    assert abs(low[20] / tab.k[20] - 1) > 0.01


def test_nonlinear_spectrum():
    w = ds.nonlinear_spectrum(1.0, 0.01, 5)
    assert np.allclose(w, [1, 2 - 0.01, 3 - 0.04, 4 - 0.09, 5 - 0.16])
    with pytest.raises(ConfigurationError):
        ds.nonlinear_spectrum(1.0, 0.5, 10)


def test_invalid_boundary():
    with pytest.raises(ConfigurationError):
        ds.BoundarySpec(-0.1, 0.0, 1.0)
    with pytest.raises(ConfigurationError):
        ds.solve_modes(ds.BoundarySpec(0.1, 0.0, 1.0), 0)
