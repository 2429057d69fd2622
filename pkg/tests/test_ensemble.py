"""Ensemble averaging: degenerate cases, scheduling invariance, and the
master-equation cross-check."""

import numpy as np
import numpy.testing as npt
import pytest

from enaqt import (
    DisorderProfile,
    EnsembleResult,
    FixedDisorder,
    GaussianNoiseSpec,
    NetworkSpec,
    NoiseTrajectory,
    ResampledDisorder,
    SpectrumSpec,
    StateVector,
    TelegraphSpec,
    build_coupling_matrix,
    derive_seed,
    generate_telegraph,
    propagate_trajectory,
    run_ensemble,
)

from conftest import ALPHA, J_MAX, N_SITES, SOURCE, reference_network


def _small_times(t_max: float, n: int = 13) -> np.ndarray:
    return np.linspace(0.0, t_max, n)


def test_single_realization_degenerates(network, disorder_strong_fixed):
    spec = TelegraphSpec(w_max=2.0 * J_MAX, dt_flip=1e-3)
    times = _small_times(network.t_max)
    res = run_ensemble(network, FixedDisorder(disorder_strong_fixed), spec,
                       n_realizations=1, master_seed=7, output_times=times)
    assert res.p_stderr.max() == 0.0
    npt.assert_array_equal(res.p_mean, res.p_realizations[0])

    noise = generate_telegraph(
        TelegraphSpec(w_max=2.0 * J_MAX, dt_flip=1e-3, seed=derive_seed(7, 0, 1)),
        N_SITES, network.t_max)
    direct = propagate_trajectory(
        build_coupling_matrix(N_SITES, J_MAX, ALPHA), disorder_strong_fixed,
        noise, StateVector.site_basis(N_SITES, SOURCE), times)
    npt.assert_array_equal(res.p_mean, direct.populations)


def test_zero_noise_fixed_disorder_is_deterministic(network, coupling,
                                                    disorder_strong_fixed):
    times = _small_times(network.t_max)
    res = run_ensemble(network, FixedDisorder(disorder_strong_fixed), None,
                       n_realizations=5, master_seed=11, output_times=times)
    assert res.p_stderr.max() == 0.0
    direct = propagate_trajectory(coupling, disorder_strong_fixed,
                                  NoiseTrajectory.zero(N_SITES, network.t_max),
                                  StateVector.site_basis(N_SITES, SOURCE), times)
    npt.assert_array_equal(res.p_mean, direct.populations)
    for r in range(5):
        npt.assert_array_equal(res.p_realizations[r], direct.populations)


def test_worker_count_does_not_change_result(network):
    spec = TelegraphSpec(w_max=3.0 * J_MAX, dt_flip=2e-3)
    times = _small_times(network.t_max)
    results = [
        run_ensemble(network, ResampledDisorder(2.5 * J_MAX), spec,
                     n_realizations=8, master_seed=2026, output_times=times,
                     workers=w)
        for w in (1, 2, 4)
    ]
    ref = results[0]
    for res in results[1:]:
        assert res.p_mean.tobytes() == ref.p_mean.tobytes()
        assert res.p_stderr.tobytes() == ref.p_stderr.tobytes()
        assert res.p_realizations.tobytes() == ref.p_realizations.tobytes()


def test_realizations_stable_under_ensemble_growth(network):
    """Realization r depends only on (master_seed, r), so enlarging the
    ensemble must not touch the realizations already drawn."""
    spec = TelegraphSpec(w_max=2.0 * J_MAX, dt_flip=1e-3)
    times = _small_times(network.t_max, 7)
    small = run_ensemble(network, ResampledDisorder(2.5 * J_MAX), spec,
                         n_realizations=2, master_seed=5, output_times=times)
    large = run_ensemble(network, ResampledDisorder(2.5 * J_MAX), spec,
                         n_realizations=6, master_seed=5, output_times=times)
    npt.assert_array_equal(small.p_realizations, large.p_realizations[:2])


def test_ensemble_matches_master_equation(ensemble_white_gamma1,
                                          lindblad_white_gamma1):
    """Fast-flip telegraph ensemble against the dephasing master equation:
    every site and time agrees within three standard errors."""
    p_lind = lindblad_white_gamma1.population_series().populations
    diff = np.abs(ensemble_white_gamma1.p_mean - p_lind)
    assert np.all(diff <= 3.0 * ensemble_white_gamma1.p_stderr + 1e-12)


def test_mirror_symmetric_statistics():
    """Odd chain, central source, flat site energies: the ensemble mean is
    left-right symmetric within statistics for any dephasing strength."""
    n = 9
    net = NetworkSpec(n_sites=n, j_max=J_MAX, alpha=ALPHA, source_site=5,
                      target_sites=(8,), t_max=0.04)
    flat = FixedDisorder(DisorderProfile(b=np.zeros(n), b_max=0.0))
    spec = TelegraphSpec.from_rate(J_MAX, 1e-3)
    times = _small_times(net.t_max, 9)
    res = run_ensemble(net, flat, spec, n_realizations=80, master_seed=23,
                       output_times=times)
    for k in range(1, 5):
        hi, lo = res.p_mean[4 + k], res.p_mean[4 - k]
        se = np.sqrt(res.p_stderr[4 + k] ** 2 + res.p_stderr[4 - k] ** 2)
        assert np.all(np.abs(hi - lo) <= 3.0 * se + 1e-12)


def test_gaussian_noise_ensemble_runs_and_repeats(network):
    spec = GaussianNoiseSpec(
        spectrum=SpectrumSpec(kind="flat", s0=J_MAX / 4.0), n_samples=600)
    times = _small_times(network.t_max, 7)
    first = run_ensemble(network, FixedDisorder(
        DisorderProfile(b=np.zeros(N_SITES), b_max=0.0)), spec,
        n_realizations=4, master_seed=77, output_times=times)
    again = run_ensemble(network, FixedDisorder(
        DisorderProfile(b=np.zeros(N_SITES), b_max=0.0)), spec,
        n_realizations=4, master_seed=77, output_times=times)
    assert first.p_mean.tobytes() == again.p_mean.tobytes()
    assert first.p_stderr.max() > 0.0


def test_validate_rejects_bad_results():
    times = np.array([0.0, 1.0])
    good = np.full((2, 2), 0.5)
    zeros = np.zeros((2, 2))
    with pytest.raises(RuntimeError, match="leave"):
        EnsembleResult(times=times, p_mean=good + 0.6, p_stderr=zeros,
                       p_realizations=good[None], master_seed=0,
                       n_realizations=1).validate()
    with pytest.raises(RuntimeError, match="total mean probability"):
        EnsembleResult(times=times, p_mean=good * 0.8, p_stderr=zeros,
                       p_realizations=good[None], master_seed=0,
                       n_realizations=1).validate()


def test_run_ensemble_argument_validation(network):
    with pytest.raises(ValueError, match="n_realizations"):
        run_ensemble(network, ResampledDisorder(0.0), None, 0, 1,
                     np.array([0.0]))
    with pytest.raises(ValueError, match="workers"):
        run_ensemble(network, ResampledDisorder(0.0), None, 1, 1,
                     np.array([0.0]), workers=0)
    with pytest.raises(ValueError, match="output_times"):
        run_ensemble(network, ResampledDisorder(0.0), None, 1, 1,
                     np.array([0.0, 2.0 * network.t_max]))
    with pytest.raises(TypeError, match="disorder policy"):
        run_ensemble(network, object(), None, 1, 1, np.array([0.0]))


def test_resampled_disorder_varies_between_realizations():
    net = reference_network()
    times = np.array([0.0, net.t_max])
    res = run_ensemble(net, ResampledDisorder(2.5 * J_MAX), None,
                       n_realizations=3, master_seed=9, output_times=times)
    assert res.p_stderr.max() > 0.0
    assert not np.array_equal(res.p_realizations[0], res.p_realizations[1])
