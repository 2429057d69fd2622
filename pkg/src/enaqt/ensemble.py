"""Noise/disorder ensembles with scheduling-independent reproducibility.

Every realization r derives its own disorder and noise seeds from the master
seed through fixed paths ((r, 0) and (r, 1)); per-realization results are
collected into an array indexed by r and reduced in that fixed order.  The
ensemble mean is therefore bit-identical whether it was computed with one
worker process or many.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import PopulationSeries, StateVector, propagate_trajectory
from .model import DisorderProfile, NetworkSpec, build_coupling_matrix, sample_disorder
from .noise import GaussianNoiseSpec, TelegraphSpec, derive_seed, realize_noise

__all__ = [
    "FixedDisorder",
    "ResampledDisorder",
    "EnsembleResult",
    "run_ensemble",
]

_STREAM_DISORDER = 0
_STREAM_NOISE = 1


@dataclass(frozen=True)
class FixedDisorder:
    """Every realization reuses this one disorder draw (noise still varies)."""

    profile: DisorderProfile


@dataclass(frozen=True)
class ResampledDisorder:
    """Each realization draws fresh disorder with bound ``b_max`` (rad/s)."""

    b_max: float

    def __post_init__(self) -> None:
        if self.b_max < 0:
            raise ValueError(f"b_max must be >= 0, got {self.b_max}")


@dataclass(frozen=True)
class EnsembleResult:
    """Mean populations with their standard error, plus every realization.

    ``p_realizations`` has shape (n_realizations, n_sites, n_times); keeping
    it allows bootstrap statistics over realizations downstream.  At the
    network sizes this package targets the array is a few megabytes at most.
    """

    times: np.ndarray
    p_mean: np.ndarray
    p_stderr: np.ndarray
    p_realizations: np.ndarray
    master_seed: object
    n_realizations: int

    @property
    def n_sites(self) -> int:
        return self.p_mean.shape[0]

    def mean_series(self) -> PopulationSeries:
        return PopulationSeries(times=self.times, populations=self.p_mean)

    def realization_series(self, r: int) -> PopulationSeries:
        return PopulationSeries(times=self.times, populations=self.p_realizations[r])

    def validate(self) -> None:
        """Probability bounds and total-probability conservation.

        The per-site mean must lie in [0, 1]; the summed mean must equal 1
        within twice its standard error (or 1e-9 when the ensemble is
        deterministic and the stderr vanishes).
        """
        if self.p_mean.min() < -1e-12 or self.p_mean.max() > 1 + 1e-12:
            raise RuntimeError("mean populations leave [0, 1]")
        total = self.p_mean.sum(axis=0)
        total_stderr = np.sqrt((self.p_stderr ** 2).sum(axis=0))
        tol = np.maximum(2.0 * total_stderr, 1e-9)
        worst = float(np.max(np.abs(total - 1.0) - tol))
        if worst > 0:
            raise RuntimeError(
                f"total mean probability deviates from 1 beyond tolerance by {worst}")


def _realize(network: NetworkSpec, disorder_policy, noise_spec, master_seed,
             r: int, output_times: np.ndarray) -> np.ndarray:
    coupling = build_coupling_matrix(network.n_sites, network.j_max, network.alpha)
    if isinstance(disorder_policy, FixedDisorder):
        disorder = disorder_policy.profile
    elif isinstance(disorder_policy, ResampledDisorder):
        disorder = sample_disorder(network.n_sites, disorder_policy.b_max,
                                   derive_seed(master_seed, r, _STREAM_DISORDER))
    else:
        raise TypeError(
            f"unsupported disorder policy {type(disorder_policy).__name__}")
    seeded = _with_seed(noise_spec, derive_seed(master_seed, r, _STREAM_NOISE))
    noise = realize_noise(seeded, network.n_sites, network.t_max)
    psi0 = StateVector.site_basis(network.n_sites, network.source_site)
    series = propagate_trajectory(coupling, disorder, noise, psi0, output_times)
    return series.populations


def _with_seed(noise_spec, seed):
    if noise_spec is None:
        return None
    if isinstance(noise_spec, (TelegraphSpec, GaussianNoiseSpec)):
        return dataclasses.replace(noise_spec, seed=seed)
    raise TypeError(f"unsupported noise spec {type(noise_spec).__name__}")


def _realize_star(args) -> np.ndarray:
    return _realize(*args)


def run_ensemble(
    network: NetworkSpec,
    disorder_policy,
    noise_spec,
    n_realizations: int,
    master_seed,
    output_times,
    workers: int = 1,
) -> EnsembleResult:
    """Average unitary noise trajectories over disorder and noise draws.

    Parameters
    ----------
    disorder_policy : FixedDisorder | ResampledDisorder
    noise_spec : TelegraphSpec | GaussianNoiseSpec | None
        Per-realization seeds are derived internally; any seed already on the
        spec is ignored.
    workers : int
        Process count.  The result is identical for every value; more workers
        only trade memory for wall time.
    """
    if n_realizations < 1:
        raise ValueError(f"n_realizations must be >= 1, got {n_realizations}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    times = np.asarray(output_times, dtype=float)
    if times.ndim != 1 or times.size < 1:
        raise ValueError("output_times must be a nonempty 1-d array")
    if times[0] < 0 or times[-1] > network.t_max * (1 + 1e-9):
        raise ValueError(f"output_times must lie within [0, {network.t_max}]")

    tasks = [(network, disorder_policy, noise_spec, master_seed, r, times)
             for r in range(n_realizations)]
    p_all = np.empty((n_realizations, network.n_sites, times.shape[0]))
    if workers == 1:
        for r, task in enumerate(tasks):
            p_all[r] = _realize_star(task)
    else:
        chunk = max(1, n_realizations // (workers * 4))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for r, populations in enumerate(pool.map(_realize_star, tasks,
                                                     chunksize=chunk)):
                p_all[r] = populations

    # shifted moments: exact zeros when every realization is identical
    dev = p_all - p_all[0]
    dev_mean = dev.mean(axis=0)
    p_mean = p_all[0] + dev_mean
    if n_realizations > 1:
        var = ((dev - dev_mean) ** 2).sum(axis=0) / (n_realizations - 1)
        p_stderr = np.sqrt(var / n_realizations)
    else:
        p_stderr = np.zeros_like(p_mean)
    result = EnsembleResult(times=times, p_mean=p_mean, p_stderr=p_stderr,
                            p_realizations=p_all, master_seed=master_seed,
                            n_realizations=n_realizations)
    result.validate()
    return result
