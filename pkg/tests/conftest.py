"""Shared fixtures: the ten-site reference network and the expensive noise
ensembles reused across module and acceptance tests (session scope, built
once)."""

from __future__ import annotations

import time

import numpy as np
import pytest

from enaqt import (
    FixedDisorder,
    NetworkSpec,
    ResampledDisorder,
    TelegraphSpec,
    lindblad_evolve,
    run_ensemble,
    sample_disorder,
    assemble_hamiltonian,
    build_coupling_matrix,
    DensityMatrix,
)

J_MAX = 2.0 * np.pi * 31.0
ALPHA = 1.22
T_MAX = 0.06
N_SITES = 10
SOURCE = 3

#: segment length giving flip rate lambda = 200 j_max (white-noise regime)
DT_WHITE = 1.0 / (200.0 * J_MAX)
#: the coarser hardware-style grid, lambda ~ 51 j_max
DT_COIN = 1e-4

GRID_1MS = np.linspace(0.0, T_MAX, 61)

#: wall-clock seconds of expensive session fixtures, keyed by name
FIXTURE_WALL: dict[str, float] = {}


def reference_network(targets=(8,)) -> NetworkSpec:
    return NetworkSpec(n_sites=N_SITES, j_max=J_MAX, alpha=ALPHA,
                       source_site=SOURCE, target_sites=tuple(targets),
                       t_max=T_MAX)


@pytest.fixture(scope="session")
def network():
    return reference_network()


@pytest.fixture(scope="session")
def coupling():
    return build_coupling_matrix(N_SITES, J_MAX, ALPHA)


@pytest.fixture(scope="session")
def disorder_strong_fixed():
    """One frozen strong-disorder draw shared by the oracle-equivalence and
    rate-equation-limit comparisons."""
    return sample_disorder(N_SITES, 2.5 * J_MAX, seed=2061)


@pytest.fixture(scope="session")
def ensemble_white_gamma1(network, disorder_strong_fixed):
    """300 telegraph trajectories, gamma = j_max, flips at 200 j_max, fixed
    disorder: the trajectory side of the Lindblad cross-check."""
    spec = TelegraphSpec.from_rate(J_MAX, DT_WHITE)
    t0 = time.perf_counter()
    result = run_ensemble(network, FixedDisorder(disorder_strong_fixed), spec,
                          n_realizations=300, master_seed=42,
                          output_times=GRID_1MS)
    FIXTURE_WALL["white_gamma1"] = time.perf_counter() - t0
    return result


@pytest.fixture(scope="session")
def lindblad_white_gamma1(coupling, disorder_strong_fixed):
    """Master-equation counterpart of ``ensemble_white_gamma1``."""
    h = assemble_hamiltonian(coupling, disorder_strong_fixed)
    rho0 = DensityMatrix.site_basis(N_SITES, SOURCE)
    return lindblad_evolve(h, J_MAX, rho0, GRID_1MS)


def _eta_ensemble(b_max: float, gamma: float, seed: int,
                  n_realizations: int = 300):
    net = reference_network()
    spec = None if gamma == 0 else TelegraphSpec.from_rate(gamma, DT_COIN)
    return run_ensemble(net, ResampledDisorder(b_max), spec,
                        n_realizations=n_realizations, master_seed=seed,
                        output_times=GRID_1MS)


@pytest.fixture(scope="session")
def ensemble_strong_g0():
    return _eta_ensemble(2.5 * J_MAX, 0.0, seed=101)


@pytest.fixture(scope="session")
def ensemble_strong_g1():
    return _eta_ensemble(2.5 * J_MAX, J_MAX, seed=102)


@pytest.fixture(scope="session")
def ensemble_strong_g30():
    return _eta_ensemble(2.5 * J_MAX, 30.0 * J_MAX, seed=103)


@pytest.fixture(scope="session")
def ensemble_weak_g0():
    """Weak-disorder point at the statistics of the measured efficiency
    curves (a few tens of realizations per point); the flatness comparison
    is calibrated to that per-point resolution."""
    return _eta_ensemble(0.5 * J_MAX, 0.0, seed=104, n_realizations=30)


@pytest.fixture(scope="session")
def ensemble_weak_g1():
    return _eta_ensemble(0.5 * J_MAX, J_MAX, seed=105, n_realizations=30)


@pytest.fixture(scope="session")
def ensemble_subdiffusive():
    """Strong disorder + strong dephasing (gamma = 18.4 j_max), the
    slow-spreading regime probed by the width-exponent checks."""
    return _eta_ensemble(2.5 * J_MAX, 18.4 * J_MAX, seed=106)
