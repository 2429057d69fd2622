"""Transport metrics: integrated arrival efficiency, wave-packet width,
power-law spreading fits, light-cone fit windows and bootstrap intervals.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import PopulationSeries
from .ensemble import EnsembleResult
from .model import CouplingMatrix

__all__ = [
    "EfficiencyReport",
    "EfficiencySummary",
    "WidthSeries",
    "PowerLawFit",
    "BootstrapCI",
    "transport_efficiency",
    "efficiency_bootstrap",
    "wavepacket_width",
    "width_bootstrap",
    "fit_power_law",
    "fit_power_law_bootstrap",
    "fit_window",
    "boundary_time",
    "bootstrap_ci",
]


@dataclass(frozen=True)
class EfficiencyReport:
    """Time-integrated populations: ``eta_raw[i]`` in seconds, ``eta_norm``
    divided by t_max (dimensionless, 1/N for a uniformly spread packet)."""

    eta_raw: np.ndarray
    eta_norm: np.ndarray
    t_max: float

    def site(self, site: int) -> float:
        """Normalized efficiency of the 1-based ``site``."""
        return float(self.eta_norm[site - 1])


@dataclass(frozen=True)
class EfficiencySummary:
    """Per-site efficiency of an ensemble with bootstrap percentiles."""

    eta_raw: np.ndarray
    eta_norm: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray
    eta_stderr: np.ndarray
    t_max: float
    n_boot: int

    def site(self, site: int) -> float:
        return float(self.eta_norm[site - 1])


@dataclass(frozen=True)
class WidthSeries:
    """Root-mean-square spread of the packet to the right of the source."""

    times: np.ndarray
    sigma: np.ndarray
    source_site: int
    ci_lo: np.ndarray | None = None
    ci_hi: np.ndarray | None = None


@dataclass(frozen=True)
class PowerLawFit:
    """sigma(t) = amplitude * t**exponent over ``window`` (seconds)."""

    amplitude: float
    exponent: float
    sigma_amplitude: float
    sigma_exponent: float
    window: tuple[float, float]
    n_points: int


@dataclass(frozen=True)
class BootstrapCI:
    point: float
    lo: float
    hi: float


def _integration_grid(series: PopulationSeries, t_max: float | None):
    times = series.times
    if t_max is None:
        t_max = float(times[-1])
    if not t_max > 0:
        raise ValueError(f"t_max must be positive, got {t_max}")
    if t_max > times[-1] * (1 + 1e-9):
        raise ValueError(
            f"series ends at {times[-1]} s, cannot integrate to {t_max} s")
    keep = times <= t_max * (1 + 1e-12)
    t = times[keep]
    p = series.populations[:, keep]
    if t[-1] < t_max * (1 - 1e-12):
        # close the window with a linearly interpolated endpoint
        p_end = np.array([np.interp(t_max, times, series.populations[i])
                          for i in range(series.n_sites)])
        t = np.append(t, t_max)
        p = np.hstack([p, p_end[:, None]])
    return t, p, float(t_max)


def transport_efficiency(series: PopulationSeries, t_max: float | None = None) -> EfficiencyReport:
    """Trapezoid integral of each site's population over [0, t_max].

    ``eta_norm = eta_raw / t_max`` so a permanently full site scores 1 and a
    uniformly spread excitation scores 1/N.
    """
    t, p, t_max = _integration_grid(series, t_max)
    if t.shape[0] < 2:
        raise ValueError("need at least two time points to integrate")
    eta_raw = np.trapezoid(p, t, axis=1)
    return EfficiencyReport(eta_raw=eta_raw, eta_norm=eta_raw / t_max, t_max=t_max)


def _per_realization_eta(ensemble: EnsembleResult, t_max: float | None) -> tuple[np.ndarray, float]:
    etas = []
    for r in range(ensemble.n_realizations):
        rep = transport_efficiency(ensemble.realization_series(r), t_max)
        etas.append(rep.eta_raw)
        t_max = rep.t_max
    return np.asarray(etas), t_max


def efficiency_bootstrap(
    ensemble: EnsembleResult,
    t_max: float | None = None,
    n_boot: int = 1000,
    seed=None,
) -> EfficiencySummary:
    """Ensemble efficiency with percentile bootstrap over realizations.

    The resampling unit is the realization (disorder draw + noise history);
    intervals are 2.5%/97.5% percentiles of the resampled mean efficiency.
    """
    etas, t_max = _per_realization_eta(ensemble, t_max)
    n = etas.shape[0]
    eta_raw = etas.mean(axis=0)
    stderr = (etas.std(axis=0, ddof=1) / np.sqrt(n)) if n > 1 else np.zeros_like(eta_raw)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, n, size=(n_boot, n))
    boot = etas[idx].mean(axis=1)
    lo, hi = np.percentile(boot, [2.5, 97.5], axis=0)
    return EfficiencySummary(eta_raw=eta_raw, eta_norm=eta_raw / t_max,
                             ci_lo=lo / t_max, ci_hi=hi / t_max,
                             eta_stderr=stderr / t_max,
                             t_max=t_max, n_boot=n_boot)


def _width_from_populations(populations: np.ndarray, source_index: int) -> np.ndarray:
    n = populations.shape[0]
    offsets = np.arange(n) - source_index
    right = offsets > 0
    weights = offsets[right] ** 2
    return np.sqrt(2.0 * (weights[:, None] * populations[right]).sum(axis=0))


def wavepacket_width(series: PopulationSeries, source_site: int) -> WidthSeries:
    """Mirror-symmetrized RMS displacement from the source.

    Only sites to the right of the source contribute (the left side is taken
    as its mirror image, hence the factor 2), so the estimator stays
    meaningful when the source sits off-centre.  A source on the right edge
    leaves nothing to measure and is rejected.
    """
    n = series.n_sites
    if not 1 <= source_site <= n:
        raise ValueError(f"source_site {source_site} outside 1..{n}")
    if source_site == n:
        raise ValueError("source on the right edge: no sites to the right, "
                         "width estimator undefined")
    sigma = _width_from_populations(series.populations, source_site - 1)
    return WidthSeries(times=series.times, sigma=sigma, source_site=source_site)


def width_bootstrap(
    ensemble: EnsembleResult,
    source_site: int,
    n_boot: int = 100,
    seed=None,
) -> WidthSeries:
    """Width of the ensemble-mean packet with bootstrap percentile bands."""
    mean_width = wavepacket_width(ensemble.mean_series(), source_site)
    n = ensemble.n_realizations
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, n, size=(n_boot, n))
    boots = np.empty((n_boot, mean_width.sigma.shape[0]))
    for b in range(n_boot):
        p_mean = ensemble.p_realizations[idx[b]].mean(axis=0)
        boots[b] = _width_from_populations(p_mean, source_site - 1)
    lo, hi = np.percentile(boots, [2.5, 97.5], axis=0)
    return WidthSeries(times=mean_width.times, sigma=mean_width.sigma,
                       source_site=source_site, ci_lo=lo, ci_hi=hi)


def fit_window(times, t_upper: float) -> tuple[float, float]:
    """Default fit window: from the first recorded t > 0 up to ``t_upper``
    clamped to the end of the series."""
    times = np.asarray(times, dtype=float)
    positive = times[times > 0]
    if positive.size == 0:
        raise ValueError("series has no positive times to fit")
    return float(positive[0]), float(min(t_upper, times[-1]))


def fit_power_law(width: WidthSeries, window: tuple[float, float]) -> PowerLawFit:
    """Least-squares line through (ln t, ln sigma) inside ``window``.

    The window must exclude t = 0; nonpositive sigma values cannot enter the
    log fit and are dropped with a warning.  Fewer than 4 usable points is an
    error.  Uncertainties are the standard linear-regression ones; for
    ensemble data prefer :func:`fit_power_law_bootstrap`.
    """
    t_lo, t_hi = window
    if not 0 < t_lo < t_hi:
        raise ValueError(f"window must satisfy 0 < t_lo < t_hi, got {window}")
    mask = (width.times >= t_lo * (1 - 1e-12)) & (width.times <= t_hi * (1 + 1e-12))
    t = width.times[mask]
    s = width.sigma[mask]
    good = s > 0
    if not np.all(good):
        warnings.warn(f"dropping {int((~good).sum())} nonpositive width values "
                      "from power-law fit", stacklevel=2)
        t, s = t[good], s[good]
    if t.shape[0] < 4:
        raise ValueError(
            f"power-law fit needs >= 4 points in window, got {t.shape[0]}")
    coeff, cov = np.polyfit(np.log(t), np.log(s), 1, cov=True)
    exponent, log_amp = coeff
    return PowerLawFit(amplitude=float(np.exp(log_amp)),
                       exponent=float(exponent),
                       sigma_amplitude=float(np.exp(log_amp) * np.sqrt(cov[1, 1])),
                       sigma_exponent=float(np.sqrt(cov[0, 0])),
                       window=(float(t_lo), float(t_hi)),
                       n_points=int(t.shape[0]))


def fit_power_law_bootstrap(
    ensemble: EnsembleResult,
    source_site: int,
    window: tuple[float, float],
    n_boot: int = 100,
    seed=None,
) -> PowerLawFit:
    """Power-law fit to the ensemble-mean width, uncertainties by resampling
    realizations (percentile-free: plain standard deviation of the refits)."""
    base = fit_power_law(wavepacket_width(ensemble.mean_series(), source_site), window)
    n = ensemble.n_realizations
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, n, size=(n_boot, n))
    amps = np.empty(n_boot)
    exps = np.empty(n_boot)
    for b in range(n_boot):
        p_mean = ensemble.p_realizations[idx[b]].mean(axis=0)
        series = PopulationSeries(times=ensemble.times, populations=p_mean)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fit = fit_power_law(wavepacket_width(series, source_site), window)
        amps[b] = fit.amplitude
        exps[b] = fit.exponent
    sigma_amp = float(amps.std(ddof=1)) if n_boot > 1 else 0.0
    sigma_exp = float(exps.std(ddof=1)) if n_boot > 1 else 0.0
    return PowerLawFit(amplitude=base.amplitude, exponent=base.exponent,
                       sigma_amplitude=sigma_amp, sigma_exponent=sigma_exp,
                       window=base.window, n_points=base.n_points)


def boundary_time(
    coupling: CouplingMatrix,
    b_max: float,
    gamma: float,
    from_site: int,
    to_path: tuple[int, ...] = (1, 2),
) -> float:
    """Earliest time for boundary effects to reach back into the bulk.

    Disorder and dephasing suppress long hops: each coupling is replaced by
    ``min(J, J^2 / (b_max^2 + gamma^2))`` with all rates measured in units of
    the nearest-neighbour coupling (the published form of the suppression is
    only dimensionless in those units).  The maximal group velocity of the
    resulting translation-invariant band is found numerically, and the quoted
    time is the traversal of ``from_site -> to_path[0] -> to_path[1] -> ...``
    at that speed.  Clean and noise-free input reproduces the bare band.
    """
    n = coupling.n_sites
    if b_max < 0 or gamma < 0:
        raise ValueError("b_max and gamma must be >= 0")
    for s in (from_site, *to_path):
        if not 1 <= s <= n:
            raise ValueError(f"site {s} outside 1..{n}")
    if not to_path:
        raise ValueError("to_path must contain at least one site")
    hops = np.abs(np.diff(np.array((from_site, *to_path), dtype=float)))
    distance = float(hops.sum())
    if distance == 0:
        raise ValueError("path has zero length")

    j_unit = coupling.j_max
    r = np.arange(1, n)
    j_hat = coupling.values[0, 1:] / j_unit
    denom = (b_max / j_unit) ** 2 + (gamma / j_unit) ** 2
    if denom > 0:
        j_eff = np.minimum(j_hat, j_hat ** 2 / denom)
    else:
        j_eff = j_hat
    k = np.linspace(0.0, np.pi, 20001)
    # group velocity of omega(k) = 2 sum_r J_eff(r) cos(k r), in sites/s
    v_of_k = 2.0 * np.abs(np.sin(np.outer(k, r)) @ (j_eff * r))
    v = float(v_of_k.max()) * j_unit
    if v == 0:
        raise ValueError("effective couplings vanish; no finite traversal time")
    return distance / v


def bootstrap_ci(
    samples,
    statistic=np.mean,
    n_boot: int = 1000,
    seed=None,
    alpha: float = 0.05,
) -> BootstrapCI:
    """Percentile bootstrap interval for ``statistic`` over axis-0 resamples.

    Returns the plug-in point estimate together with the alpha/2 and
    1 - alpha/2 percentiles of the resampled statistic.  Identical samples
    give a zero-width interval.
    """
    samples = np.asarray(samples)
    if samples.shape[0] < 1:
        raise ValueError("need at least one sample")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    n = samples.shape[0]
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, n, size=(n_boot, n))
    boot = np.array([statistic(samples[row]) for row in idx], dtype=float)
    lo, hi = np.percentile(boot, [100 * alpha / 2, 100 * (1 - alpha / 2)])
    return BootstrapCI(point=float(statistic(samples)), lo=float(lo), hi=float(hi))
