import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import trapezoid

from hotnet import dynamics as dy
from hotnet.core import (
    ConfigurationError,
    NetworkSpec,
    QubitSpec,
    UltraStrongCouplingWarning,
    bose_occupation,
    build_mode_set,
    coupling_matrix_closed_form,
    coupling_matrix_modesum,
    default_n_modes,
    spin_configurations,
)
from hotnet.measures import (
    StateValidationError,
    UnsupportedObservableError,
    concurrence,
    equatorial_state,
    purity,
    reduced_state,
    trace_distance,
    validate_density_matrix,
    validate_pure,
    von_neumann_entropy,
)
from hotnet.oracle import OracleLimitError, evolve_oracle


# ---------------------------------------------------------------- core model

def test_two_qubit_fixture_units():
    spec = NetworkSpec.two_qubit_gate()
    assert spec.omega1 == pytest.approx(1.0)
    assert spec.tau == pytest.approx(2 * math.pi)
    assert spec.couplings == pytest.approx([1 / math.sqrt(8)] * 2)
    assert spec.positions[1] + spec.cutoff == pytest.approx(spec.length)


@pytest.mark.parametrize("kwargs", [dict(cutoff=0.0), dict(cutoff=1.5), dict(temperature=-1.0)])
def test_invalid_network_rejected(kwargs):
    with pytest.raises(ConfigurationError):
        NetworkSpec.two_qubit_gate(**kwargs)


def test_qubit_outside_line_rejected():
    with pytest.raises(ConfigurationError):
        NetworkSpec(1.0, 1 / math.pi, 0.1, 0.0, (QubitSpec(0.95, 0.0, 0.1),))


def test_bose_occupation_vacuum_and_classical_limit():
    assert bose_occupation(1.0, 0.0) == 0.0
    assert float(bose_occupation(1.0, 1.0)) == pytest.approx(1 / (math.e - 1))
    assert float(bose_occupation(1e-3, 1.0)) == pytest.approx(1e3 - 0.5, rel=1e-6)


def test_default_mode_count():
    assert default_n_modes(NetworkSpec.two_qubit_gate(cutoff=0.03)) == 134


def test_spin_basis_order():
    s = spin_configurations(2)
    assert s.tolist() == [[1, 1], [1, -1], [-1, 1], [-1, -1]]


def test_modesum_approaches_closed_form():
    # distant qubits: J = g^2 / omega1 in the infinite-mode limit
    spec = NetworkSpec.two_qubit_gate(cutoff=0.03)
    ref = coupling_matrix_closed_form(spec)[0, 1]
    assert ref == pytest.approx(spec.couplings[0] ** 2 / spec.omega1)
    errs = [abs(coupling_matrix_modesum(build_mode_set(spec, n))[0, 1] / ref - 1) for n in (30, 300, 3000)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-3


def test_ultrastrong_warning():
    with pytest.warns(UltraStrongCouplingWarning):
        build_mode_set(NetworkSpec.two_qubit_gate(g=3.0), 4)


def test_calibration_hits_quarter_phase():
    spec, modes, _ = dy.standard_gate_setup()
    J = coupling_matrix_modesum(modes)[0, 1]
    assert J * spec.tau == pytest.approx(math.pi / 4, rel=1e-14)


def test_commensurability_time():
    assert dy.commensurability_time([1, 2, 3]) == pytest.approx(2 * math.pi)
    assert dy.commensurability_time(["1/2", 1]) == pytest.approx(4 * math.pi)
    assert dy.commensurability_time([1, math.sqrt(2)]) is None


# ---------------------------------------------------------------- measures

def test_concurrence_known_states():
    bell = np.array([1, 0, 0, 1]) / math.sqrt(2)
    assert concurrence(np.outer(bell, bell)) == pytest.approx(1.0, abs=1e-14)
    prod = np.kron([1, 0], [1, 1]) / math.sqrt(2)
    assert concurrence(np.outer(prod, prod)) == pytest.approx(0.0, abs=1e-14)


@given(st.floats(0, 1))
def test_werner_concurrence(p):
    # Wootters: C = max(0, (3p - 1) / 2)
    bell = np.array([1, 0, 0, 1]) / math.sqrt(2)
    rho = p * np.outer(bell, bell) + (1 - p) * np.eye(4) / 4
    assert concurrence(rho) == pytest.approx(max(0.0, (3 * p - 1) / 2), abs=1e-9)


def test_entropy_and_reduced_state():
    bell = np.array([1, 0, 0, 1]) / math.sqrt(2)
    red = reduced_state(np.outer(bell, bell), [0], 2)
    assert np.allclose(red, np.eye(2) / 2)
    assert von_neumann_entropy(red) == pytest.approx(math.log(2))
    with pytest.raises(UnsupportedObservableError):
        concurrence(np.eye(8) / 8)


def test_state_validation():
    with pytest.raises(StateValidationError):
        validate_pure([1, 1])
    with pytest.raises(StateValidationError):
        validate_pure([1, 0, 0])
    with pytest.raises(StateValidationError):
        validate_density_matrix(np.diag([1.2, -0.2]))


# ---------------------------------------------------------------- closed-form dynamics

def test_single_qubit_decoherence_closed_form():
    # one qubit, one mode: |rho_01(t)| = exp(-(2n+1) 8 g^2 sin^2(wt/2) / w^2)
    spec = NetworkSpec(1.0, 1 / math.pi, 0.05, 0.7, (QubitSpec(0.2, 0.0, 0.15),))
    modes = build_mode_set(spec, 1)
    g, w, nbar = modes.couplings[0, 0], modes.omega[0], modes.thermal_occ[0]
    ts = np.linspace(0, 1.3, 17) * spec.tau
    rhos = dy.evolve_exact(spec, modes, np.array([1, 1]) / math.sqrt(2), ts)
    expected = 0.5 * np.exp(-(2 * nbar + 1) * 8 * g**2 * np.sin(w * ts / 2) ** 2 / w**2)
    assert np.allclose(np.abs(rhos[:, 0, 1]), expected, rtol=1e-12, atol=0)


def test_zero_temperature_decay_uses_vacuum():
    spec, modes, psi0 = dy.standard_gate_setup(temperature=0.0)
    assert np.all(modes.thermal_occ == 0)


@settings(max_examples=25)
@given(T=st.floats(0, 3), a=st.floats(0.02, 0.3), p=st.integers(1, 3))
def test_stroboscopic_purity_restored(T, a, p):
    spec = NetworkSpec.two_qubit_gate(cutoff=a, temperature=T)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UltraStrongCouplingWarning)
        modes = build_mode_set(spec, 20)
    rho = dy.evolve_exact(spec, modes, equatorial_state(2), [p * spec.tau])[0]
    assert purity(rho) == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=25)
@given(T=st.floats(0, 3), t=st.floats(0, 3), seed=st.integers(0, 1000))
def test_populations_conserved_and_state_physical(T, t, seed):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi /= np.linalg.norm(psi)
    spec, modes, _ = dy.standard_gate_setup(temperature=T)
    rho = dy.evolve_exact(spec, modes, psi, [t * spec.tau])[0]
    assert np.allclose(np.diag(rho).real, np.abs(psi) ** 2, atol=1e-14)
    validate_density_matrix(rho, herm_tol=1e-14, trace_tol=1e-12, eig_tol=1e-12)


def test_purity_dips_mid_gate_when_hot():
    spec, modes, psi0 = dy.standard_gate_setup(temperature=2.0)
    rep = dy.gate_report(spec, modes, psi0, np.ones(4), np.linspace(0, 1, 41) * spec.tau)
    assert rep.purity.min() < 0.99
    assert rep.entropy.max() > 0.01


def test_photon_number_positive_mid_gate_and_zero_at_tau():
    spec, modes, psi0 = dy.standard_gate_setup(temperature=1.0)
    rep = dy.gate_report(spec, modes, psi0, np.ones(4), [0.5 * spec.tau, spec.tau])
    assert rep.net_photons[0] > 1
    assert abs(rep.net_photons[1]) < 1e-10


def test_realspace_density_integrates_to_mode_total():
    spec, modes, psi0 = dy.standard_gate_setup(temperature=0.0, n_modes=12)
    xs = np.linspace(0, spec.length, 4001)
    mo, xs, ro = dy.photon_observables(modes, np.abs(psi0) ** 2, [0.3 * spec.tau], xs, spec.length)
    assert trapezoid(ro[0], xs) == pytest.approx(mo[0].sum(), rel=1e-6)


def test_timing_error_vanishes_at_stroboscopic_time():
    spec, modes, psi0 = dy.standard_gate_setup()
    scan = dy.timing_error_scan(spec, modes, psi0, [1, 2], [0.0, 1e-3])
    assert np.all(np.abs(scan.error[:, 0]) < 1e-12)
    assert np.all(scan.error[:, 1] > 0)


def test_nonlinear_dispersion_zero_epsilon_is_exact():
    spec = NetworkSpec.two_qubit_gate(cutoff=0.3)
    scan = dy.nonlinear_dispersion_scan(spec, [0.0], [1], n_modes=8)
    assert scan.min_error[0, 0] <= 1e-12


def test_nonlinear_dispersion_rejects_nonpositive_frequency():
    spec = NetworkSpec.two_qubit_gate(cutoff=0.3)
    with pytest.raises(ConfigurationError):
        dy.nonlinear_modes(spec, 0.5, 10)


# ---------------------------------------------------------------- oracle

@settings(max_examples=6)
@given(T=st.floats(0, 1.0), a=st.floats(0.05, 0.3))
def test_oracle_matches_closed_form(T, a):
    spec = NetworkSpec.two_qubit_gate(cutoff=a, temperature=T)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UltraStrongCouplingWarning)
        modes = build_mode_set(spec, 2)
    ts = np.linspace(0, 1, 4) * spec.tau
    res = evolve_oracle(spec, modes, equatorial_state(2), ts, fock_cutoff=12)
    exact = dy.evolve_exact(spec, modes, equatorial_state(2), ts)
    dist = max(trace_distance(x, y) for x, y in zip(exact, res.rhos))
    assert dist <= 1e-4 + res.truncation_bound


def test_oracle_converges_with_fock_cutoff():
    spec = NetworkSpec.two_qubit_gate(cutoff=0.1, temperature=0.5)
    modes = build_mode_set(spec, 1)
    ts = [0.4 * spec.tau]
    exact = dy.evolve_exact(spec, modes, equatorial_state(2), ts)[0]
    d = [trace_distance(exact, evolve_oracle(spec, modes, equatorial_state(2), ts, F,
                                             estimate_truncation=False).rhos[0]) for F in (8, 14, 20)]
    assert d[0] > d[1] > d[2]
    assert d[2] < 1e-6


def test_oracle_dimension_limit():
    spec = NetworkSpec.two_qubit_gate()
    with pytest.raises(OracleLimitError):
        evolve_oracle(spec, build_mode_set(spec, 5), equatorial_state(2), [0.0], fock_cutoff=12)
