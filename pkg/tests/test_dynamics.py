"""Solvers against closed forms and an independent adaptive integrator."""

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from enaqt import (
    DensityMatrix,
    DisorderProfile,
    NoiseTrajectory,
    RateMatrix,
    StateVector,
    TelegraphSpec,
    assemble_hamiltonian,
    build_coupling_matrix,
    classical_rates,
    generate_telegraph,
    lindblad_evolve,
    propagate_trajectory,
    rate_equation_evolve,
)

from conftest import ALPHA, J_MAX

# populations of the clean 10-site chain at t = 60 ms (psi0 = |3>), computed
# with an independent high-order adaptive integrator (DOP853, rtol 1e-12)
CLEAN_60MS = np.array([
    0.00681549821, 0.027301339841, 0.218006999708, 0.063359164094,
    0.051924759686, 0.292477811906, 0.065546736234, 0.139663436864,
    0.002603480699, 0.132300772758,
])


# ------------------------------------------------------- unitary trajectory

def test_zero_coupling_freezes_populations():
    n = 5
    disorder = DisorderProfile(b=np.array([3.0, -1.0, 0.5, 2.0, -2.0]), b_max=3.0)
    noise = generate_telegraph(TelegraphSpec(w_max=50.0, dt_flip=1e-3, seed=4), n, 0.05)
    psi0 = StateVector(amplitudes=np.full(n, 1.0 / np.sqrt(n), dtype=complex))
    series = propagate_trajectory(np.zeros((n, n)), disorder, noise, psi0,
                                  np.linspace(0.0, 0.05, 11))
    npt.assert_allclose(series.populations, 1.0 / n, atol=1e-12)


def test_two_site_rabi_flopping():
    j = 200.0
    coupling = build_coupling_matrix(2, j, 1.22)
    times = np.linspace(0.0, 0.05, 101)
    series = propagate_trajectory(coupling, None, NoiseTrajectory.zero(2, 0.05),
                                  StateVector.site_basis(2, 1), times)
    npt.assert_allclose(series.populations[1], np.sin(j * times) ** 2, atol=1e-9)


def test_clean_chain_matches_frozen_oracle():
    coupling = build_coupling_matrix(10, J_MAX, ALPHA)
    series = propagate_trajectory(coupling, None, NoiseTrajectory.zero(10, 0.06),
                                  StateVector.site_basis(10, 3), np.array([0.06]))
    npt.assert_allclose(series.populations[:, 0], CLEAN_60MS, atol=1e-6)


def test_noisy_trajectory_matches_adaptive_integrator():
    """Same piecewise-constant Hamiltonian handed to DOP853: populations must
    agree to 1e-6 even for output times inside segments."""
    n = 6
    coupling = build_coupling_matrix(n, J_MAX, ALPHA)
    disorder = DisorderProfile(
        b=np.array([0.3, -1.1, 0.7, 0.05, -0.6, 1.0]) * J_MAX, b_max=1.1 * J_MAX)
    noise = generate_telegraph(
        TelegraphSpec(w_max=4.0 * J_MAX, dt_flip=2e-3, seed=9), n, 0.01)
    times = np.array([0.0, 0.0007, 0.002, 0.0031, 0.0055, 0.0099, 0.01])
    series = propagate_trajectory(coupling, disorder, noise,
                                  StateVector.site_basis(n, 2), times)

    def rhs(t, y):
        k = min(int(t / noise.dt), noise.n_steps - 1)
        h = np.array(coupling.values)
        h[np.diag_indices(n)] = 2.0 * (disorder.b + noise.values[:, k])
        psi = y[:n] + 1j * y[n:]
        d = -1j * (h @ psi)
        return np.concatenate([d.real, d.imag])

    y0 = np.zeros(2 * n)
    y0[1] = 1.0
    sol = solve_ivp(rhs, (0.0, 0.01), y0, method="DOP853", rtol=1e-11,
                    atol=1e-13, t_eval=times, max_step=noise.dt / 4)
    p_ref = sol.y[:n] ** 2 + sol.y[n:] ** 2
    npt.assert_allclose(series.populations, p_ref, atol=1e-6)


def test_mid_segment_output_matches_expm_product():
    n = 4
    rng = np.random.default_rng(31)
    coupling = build_coupling_matrix(n, 100.0, 1.0)
    disorder = DisorderProfile(b=rng.uniform(-50.0, 50.0, n), b_max=50.0)
    noise = NoiseTrajectory(dt=1e-3, values=rng.uniform(-200.0, 200.0, (n, 3)))
    t_probe = 1.45e-3
    series = propagate_trajectory(coupling, disorder, noise,
                                  StateVector.site_basis(n, 1),
                                  np.array([t_probe]))
    h = [np.array(coupling.values) for _ in range(2)]
    for k in range(2):
        h[k][np.diag_indices(n)] = 2.0 * (disorder.b + noise.values[:, k])
    u = expm(-1j * h[1] * 0.45e-3) @ expm(-1j * h[0] * 1e-3)
    p_ref = np.abs(u[:, 0]) ** 2
    npt.assert_allclose(series.populations[:, 0], p_ref, atol=1e-10)


def test_trajectory_norm_conservation_long_run():
    coupling = build_coupling_matrix(10, J_MAX, ALPHA)
    noise = generate_telegraph(
        TelegraphSpec.from_rate(J_MAX, 1e-4, seed=6), 10, 0.06)
    disorder = DisorderProfile(b=np.zeros(10), b_max=0.0)
    series = propagate_trajectory(coupling, disorder, noise,
                                  StateVector.site_basis(10, 3),
                                  np.linspace(0.0, 0.06, 61))
    total = series.populations.sum(axis=0)
    npt.assert_allclose(total, 1.0, atol=1e-9)


def test_clean_symmetric_chain_is_mirror_symmetric():
    n = 9
    coupling = build_coupling_matrix(n, J_MAX, ALPHA)
    series = propagate_trajectory(coupling, None, NoiseTrajectory.zero(n, 0.04),
                                  StateVector.site_basis(n, 5),
                                  np.linspace(0.0, 0.04, 41))
    p = series.populations
    for k in range(1, 5):
        npt.assert_allclose(p[4 + k], p[4 - k], atol=1e-11)


def test_output_times_validation():
    coupling = build_coupling_matrix(3, 1.0, 1.0)
    noise = NoiseTrajectory.zero(3, 1.0)
    psi = StateVector.site_basis(3, 1)
    with pytest.raises(ValueError, match="output_times"):
        propagate_trajectory(coupling, None, noise, psi, np.array([0.5, 0.2]))
    with pytest.raises(ValueError, match="output_times"):
        propagate_trajectory(coupling, None, noise, psi, np.array([0.5, 1.2]))


# ----------------------------------------------------------------- lindblad

def test_lindblad_gamma_zero_matches_unitary():
    n = 6
    coupling = build_coupling_matrix(n, J_MAX, ALPHA)
    disorder = DisorderProfile(
        b=np.array([0.5, -0.2, 0.9, -1.0, 0.1, 0.4]) * J_MAX, b_max=J_MAX)
    times = np.linspace(0.0, 0.02, 21)
    h = assemble_hamiltonian(coupling, disorder)
    res = lindblad_evolve(h, 0.0, DensityMatrix.site_basis(n, 2), times)
    unitary = propagate_trajectory(coupling, disorder, NoiseTrajectory.zero(n, 0.02),
                                   StateVector.site_basis(n, 2), times)
    npt.assert_allclose(res.population_series().populations,
                        unitary.populations, atol=1e-6)


def test_lindblad_decoupled_closed_form():
    """J = 0: populations freeze and each coherence spirals down at the
    dephasing rate with phase 2(B_i - B_j)."""
    b = np.array([40.0, -10.0, 25.0])
    gamma = 180.0
    h = np.diag(2.0 * b)
    psi = StateVector(amplitudes=np.full(3, 1.0 / np.sqrt(3.0), dtype=complex))
    rho0 = DensityMatrix.from_state(psi)
    times = np.linspace(0.0, 0.02, 9)
    res = lindblad_evolve(h, gamma, rho0, times)
    for k, t in enumerate(times):
        expected = np.array(rho0.values, dtype=complex)
        for i in range(3):
            for j in range(3):
                if i != j:
                    expected[i, j] *= np.exp((-2j * (b[i] - b[j]) - gamma) * t)
        npt.assert_allclose(res.rho[k], expected, atol=1e-8)


def test_lindblad_strong_dephasing_reaches_rate_limit():
    """N=2, gamma = 100 J: populations follow the incoherent relaxation
    p2 = (1 - exp(-2 Gamma t))/2 with Gamma = 2 J^2/gamma once t > 10/gamma."""
    j = 1.0
    gamma = 100.0
    coupling = build_coupling_matrix(2, j, 1.0)
    h = assemble_hamiltonian(coupling)
    times = np.linspace(0.0, 20.0, 9)
    res = lindblad_evolve(h, gamma, DensityMatrix.site_basis(2, 1), times)
    p2 = res.population_series().populations[1]
    rate = classical_rates(coupling, None, gamma).values[0, 1]
    npt.assert_allclose(rate, 2.0 * j ** 2 / gamma, rtol=1e-12)
    mask = times > 10.0 / gamma
    expected = 0.5 * (1.0 - np.exp(-2.0 * rate * times[mask]))
    npt.assert_allclose(p2[mask], expected, atol=0.02)


def test_lindblad_conservation_and_positivity():
    n = 8
    coupling = build_coupling_matrix(n, J_MAX, ALPHA)
    disorder = DisorderProfile(b=np.linspace(-2.0, 2.0, n) * J_MAX, b_max=2.0 * J_MAX)
    h = assemble_hamiltonian(coupling, disorder)
    times = np.linspace(0.0, 0.03, 16)
    res = lindblad_evolve(h, J_MAX, DensityMatrix.site_basis(n, 1), times)
    traces = np.einsum("kii->k", res.rho).real
    npt.assert_allclose(traces, 1.0, atol=1e-9)
    for k in range(res.rho.shape[0]):
        npt.assert_allclose(res.rho[k], res.rho[k].conj().T, atol=1e-9)
        assert np.linalg.eigvalsh(res.rho[k]).min() > -1e-8
    p = res.population_series().populations
    assert p.min() > -1e-10 and p.max() <= 1.0 + 1e-10


def test_lindblad_max_step_override_refines():
    h = assemble_hamiltonian(build_coupling_matrix(2, 1.0, 1.0))
    rho0 = DensityMatrix.site_basis(2, 1)
    times = np.array([0.0, 1.0])
    coarse = lindblad_evolve(h, 1.0, rho0, times)
    fine = lindblad_evolve(h, 1.0, rho0, times, max_step=1e-3)
    npt.assert_allclose(coarse.rho[-1], fine.rho[-1], atol=1e-7)


def test_lindblad_rejects_negative_rates():
    h = assemble_hamiltonian(build_coupling_matrix(2, 1.0, 1.0))
    with pytest.raises(ValueError, match=">= 0"):
        lindblad_evolve(h, -1.0, DensityMatrix.site_basis(2, 1), np.array([0.1]))


# ----------------------------------------------------------- classical rates

def test_classical_rates_resonant_value():
    # J=1, gamma=2, zero detuning: Gamma = 2*2*1/(0+4) = 1
    coupling = np.array([[0.0, 1.0], [1.0, 0.0]])
    rates = classical_rates(coupling, None, 2.0)
    npt.assert_allclose(rates.values, [[0.0, 1.0], [1.0, 0.0]], rtol=1e-14)


def test_classical_rates_agree_with_liouvillian_relaxation():
    """Detuned two-site check against the exact dephasing Liouvillian: the
    slowest nonzero Liouvillian mode must equal 2*Gamma_12 when gamma
    dominates both J and the detuning."""
    j, delta_b, gamma = 1.0, 2.0, 60.0
    coupling = np.array([[0.0, j], [j, 0.0]])
    disorder = DisorderProfile(b=np.array([0.0, delta_b]), b_max=delta_b)
    # variables (p1 - p2, Re rho12, Im rho12); total probability decouples
    de = 2.0 * delta_b
    lv = np.array([
        [0.0, 0.0, -4.0 * j],
        [0.0, -gamma, de],
        [j, -de, -gamma],
    ])
    slow = -np.max(np.linalg.eigvals(lv).real)
    rate = classical_rates(coupling, disorder, gamma).values[0, 1]
    npt.assert_allclose(slow, 2.0 * rate, rtol=2e-3)


def test_classical_rates_peak_at_twice_detuning():
    j = 1.0
    delta_b = 3.0
    disorder = DisorderProfile(b=np.array([0.0, delta_b]), b_max=delta_b)
    coupling = np.array([[0.0, j], [j, 0.0]])
    gammas = np.linspace(0.05, 30.0, 4000)
    vals = np.array([classical_rates(coupling, disorder, g).values[0, 1]
                     for g in gammas])
    g_star = gammas[np.argmax(vals)]
    assert abs(g_star - 2.0 * delta_b) < 0.02


def test_classical_rates_zeno_suppression():
    coupling = np.array([[0.0, 1.0], [1.0, 0.0]])
    small = classical_rates(coupling, None, 1e6).values[0, 1]
    assert small < 1e-5


def test_classical_rates_reject_zero_gamma():
    coupling = np.array([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(ValueError, match="positive dephasing"):
        classical_rates(coupling, None, 0.0)


@given(
    delta_b=st.floats(0.0, 50.0),
    gamma_lo=st.floats(0.01, 1e4),
    ratio=st.floats(1.0001, 100.0),
)
def test_classical_rates_zeno_monotonicity(delta_b, gamma_lo, ratio):
    """Past gamma = 2|delta B| every rate decreases with further dephasing."""
    g1 = 2.0 * delta_b + gamma_lo
    g2 = g1 * ratio
    coupling = np.array([[0.0, 1.0], [1.0, 0.0]])
    disorder = DisorderProfile(b=np.array([0.0, delta_b]), b_max=max(delta_b, 1.0))
    r1 = classical_rates(coupling, disorder, g1).values[0, 1]
    r2 = classical_rates(coupling, disorder, g2).values[0, 1]
    assert r2 < r1


# ------------------------------------------------------------ rate equation

def test_rate_equation_zero_rates_freeze():
    rates = RateMatrix(values=np.zeros((3, 3)))
    p0 = np.array([0.2, 0.5, 0.3])
    series = rate_equation_evolve(rates, p0, np.linspace(0.0, 5.0, 6))
    npt.assert_allclose(series.populations, np.tile(p0[:, None], (1, 6)),
                        atol=1e-14)


def test_rate_equation_two_state_closed_form():
    g = 0.7
    rates = RateMatrix(values=np.array([[0.0, g], [g, 0.0]]))
    times = np.linspace(0.0, 4.0, 17)
    series = rate_equation_evolve(rates, np.array([1.0, 0.0]), times)
    npt.assert_allclose(series.populations[0],
                        0.5 + 0.5 * np.exp(-2.0 * g * times), atol=1e-12)


def test_rate_equation_relaxes_to_uniform():
    rng = np.random.default_rng(2)
    n = 7
    v = rng.uniform(0.2, 1.0, (n, n))
    v = 0.5 * (v + v.T)
    np.fill_diagonal(v, 0.0)
    rates = RateMatrix(values=v)
    p0 = np.zeros(n)
    p0[0] = 1.0
    series = rate_equation_evolve(rates, p0, np.array([200.0]))
    npt.assert_allclose(series.populations[:, 0], 1.0 / n, atol=1e-6)


def test_rate_equation_conserves_probability_to_roundoff():
    coupling = build_coupling_matrix(10, J_MAX, ALPHA)
    disorder = DisorderProfile(b=np.linspace(-2.5, 2.5, 10) * J_MAX,
                               b_max=2.5 * J_MAX)
    rates = classical_rates(coupling, disorder, 3.9 * J_MAX)
    p0 = np.zeros(10)
    p0[2] = 1.0
    series = rate_equation_evolve(rates, p0, np.linspace(0.0, 0.06, 61))
    npt.assert_allclose(series.populations.sum(axis=0), 1.0, atol=1e-12)
    assert series.populations.min() >= -1e-12


# ------------------------------------------------------------- state types

def test_state_vector_validation():
    with pytest.raises(ValueError, match="norm"):
        StateVector(amplitudes=np.array([1.0, 1.0], dtype=complex))
    s = StateVector.site_basis(4, 4)
    assert s.populations()[3] == 1.0
    with pytest.raises(ValueError, match="site"):
        StateVector.site_basis(4, 5)


def test_density_matrix_validation():
    with pytest.raises(ValueError, match="trace"):
        DensityMatrix(values=np.eye(2))
    with pytest.raises(ValueError, match="hermitian"):
        DensityMatrix(values=np.array([[1.0, 0.5], [0.1, 0.0]]))
    with pytest.raises(ValueError, match="negative eigenvalue"):
        DensityMatrix(values=np.array([[1.5, 0.0], [0.0, -0.5]]))
