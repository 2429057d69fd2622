"""Time-dependent on-site noise: telegraph (coin-toss) and spectrally shaped
Gaussian processes, plus spectral estimation and control-cost bookkeeping.

A :class:`NoiseTrajectory` is piecewise constant: ``values[i, k]`` holds W_i in
rad/s on the interval ``[k*dt, (k+1)*dt)``.  Site rows are statistically
independent; every random draw is derived from a root seed through a fixed
``(stream, site, ...)`` key so that results never depend on generation order
or worker scheduling.

Convention: S(omega) always refers to the spectrum of W itself.  The
dephasing rate gamma = w_max^2 * dt_flip quoted for telegraph noise is the
zero-frequency spectral density of the doubled process 2W(t) that actually
enters the Hamiltonian diagonal, which is 4x the spectrum of W.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "TelegraphSpec",
    "SpectrumSpec",
    "GaussianNoiseSpec",
    "NoiseTrajectory",
    "EnergyCost",
    "EstimatedSpectrum",
    "derive_seed",
    "generate_telegraph",
    "dephasing_rate",
    "spectrum_value",
    "synthesize_gaussian",
    "estimate_spectrum",
    "realize_noise",
    "energy_cost",
]

_SPECTRUM_KINDS = ("flat", "lorentzian", "tabulated")


def derive_seed(root, *path: int) -> np.random.SeedSequence:
    """Deterministic sub-seed at ``path`` below ``root``.

    ``root`` may be an int, a ``SeedSequence`` or None (fresh OS entropy).
    Distinct paths give statistically independent streams; the derivation is a
    pure function, so any worker can recreate any stream.
    """
    if isinstance(root, np.random.SeedSequence):
        base_entropy = root.entropy
        base_key = tuple(root.spawn_key)
    else:
        base_entropy = root
        base_key = ()
    return np.random.SeedSequence(entropy=base_entropy,
                                  spawn_key=base_key + tuple(int(p) for p in path))


@dataclass(frozen=True)
class TelegraphSpec:
    """Coin-toss noise: every ``dt_flip`` seconds each site independently
    draws W = +w_max/2 or -w_max/2 with equal probability."""

    w_max: float
    dt_flip: float
    seed: object = None

    def __post_init__(self) -> None:
        if self.w_max < 0:
            raise ValueError(f"w_max must be >= 0, got {self.w_max}")
        if not self.dt_flip > 0:
            raise ValueError(f"dt_flip must be positive, got {self.dt_flip}")

    @classmethod
    def from_rate(cls, gamma: float, dt_flip: float, seed=None) -> "TelegraphSpec":
        """Spec whose white-noise dephasing rate equals ``gamma`` (rad/s):
        w_max = sqrt(gamma / dt_flip)."""
        if gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {gamma}")
        if not dt_flip > 0:
            raise ValueError(f"dt_flip must be positive, got {dt_flip}")
        return cls(w_max=float(np.sqrt(gamma / dt_flip)), dt_flip=dt_flip, seed=seed)


@dataclass(frozen=True)
class SpectrumSpec:
    """Target spectral density S(omega) of W, treated as symmetric in omega.

    kinds
    -----
    flat        : S = s0 everywhere
    lorentzian  : S = s0 * (kappa/2)^2 / ((|omega| - omega0)^2 + (kappa/2)^2)
    tabulated   : linear interpolation of (omega, s) pairs, zero outside
    """

    kind: str
    s0: float | None = None
    omega0: float | None = None
    kappa: float | None = None
    table: tuple[np.ndarray, np.ndarray] | None = None

    def __post_init__(self) -> None:
        if self.kind not in _SPECTRUM_KINDS:
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        if self.kind == "flat":
            if self.s0 is None or self.s0 < 0:
                raise ValueError("flat spectrum needs s0 >= 0")
        elif self.kind == "lorentzian":
            if self.s0 is None or self.s0 < 0:
                raise ValueError("lorentzian spectrum needs s0 >= 0")
            if self.omega0 is None or self.omega0 < 0:
                raise ValueError("lorentzian spectrum needs omega0 >= 0")
            if self.kappa is None or not self.kappa > 0:
                raise ValueError("lorentzian spectrum needs kappa > 0")
        else:
            if self.table is None:
                raise ValueError("tabulated spectrum needs a table")
            omega = np.asarray(self.table[0], dtype=float)
            s = np.asarray(self.table[1], dtype=float)
            if omega.ndim != 1 or omega.shape != s.shape or omega.size < 2:
                raise ValueError("table must be two equal-length 1-d arrays "
                                 "with at least two points")
            if np.any(np.diff(omega) <= 0) or omega[0] < 0:
                raise ValueError("table frequencies must be >= 0 and ascending")
            if np.any(s < 0):
                raise ValueError("spectral density must be nonnegative")
            omega = np.array(omega, copy=True)
            s = np.array(s, copy=True)
            omega.setflags(write=False)
            s.setflags(write=False)
            object.__setattr__(self, "table", (omega, s))


@dataclass(frozen=True)
class NoiseTrajectory:
    """Piecewise-constant noise record; ``values`` has shape (n_sites, n_steps)."""

    dt: float
    values: np.ndarray
    seed: object = None

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        v = np.array(self.values, dtype=float, copy=True)
        if v.ndim != 2 or v.shape[1] < 1:
            raise ValueError(
                f"values must be (n_sites, n_steps) with n_steps >= 1, got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_sites(self) -> int:
        return self.values.shape[0]

    @property
    def n_steps(self) -> int:
        return self.values.shape[1]

    @property
    def t_total(self) -> float:
        return self.n_steps * self.dt

    @classmethod
    def zero(cls, n_sites: int, t_total: float) -> "NoiseTrajectory":
        """Noise-free trajectory: a single all-zero segment spanning t_total."""
        if not t_total > 0:
            raise ValueError(f"t_total must be positive, got {t_total}")
        return cls(dt=float(t_total), values=np.zeros((n_sites, 1)))

    def to_csv(self, path) -> None:
        """Write rows (site, step_index, time_s, w_rad_per_s); site is 1-based."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["site", "step_index", "time_s", "w_rad_per_s"])
            for i in range(self.n_sites):
                for k in range(self.n_steps):
                    writer.writerow([i + 1, k, repr(k * self.dt),
                                     repr(float(self.values[i, k]))])


def generate_telegraph(spec: TelegraphSpec, n_sites: int, t_total: float) -> NoiseTrajectory:
    """Telegraph noise for ``n_sites`` independent sites over ``[0, t_total]``.

    The grid has ``ceil(t_total / dt_flip)`` segments; the final one may extend
    past ``t_total`` (propagation truncates it).  Each site row comes from its
    own sub-seed, so row i is unchanged when n_sites grows.
    """
    if n_sites < 1:
        raise ValueError(f"n_sites must be >= 1, got {n_sites}")
    if not t_total > 0:
        raise ValueError(f"t_total must be positive, got {t_total}")
    n_steps = int(np.ceil(t_total / spec.dt_flip - 1e-12))
    values = np.empty((n_sites, n_steps))
    for i in range(n_sites):
        rng = np.random.default_rng(derive_seed(spec.seed, 0, i))
        signs = 2 * rng.integers(0, 2, size=n_steps) - 1
        values[i] = 0.5 * spec.w_max * signs
    return NoiseTrajectory(dt=spec.dt_flip, values=values, seed=spec.seed)


def dephasing_rate(spec: TelegraphSpec) -> float:
    """White-noise dephasing rate gamma = w_max^2 * dt_flip (rad/s).

    Valid when flips are fast compared to gamma itself (w_max * dt_flip << 1);
    single-site coherence then decays as exp(-gamma t / 2).
    """
    return spec.w_max ** 2 * spec.dt_flip


def spectrum_value(spec: SpectrumSpec, omega) -> np.ndarray:
    """Evaluate S(|omega|) on an array of angular frequencies (rad/s)."""
    omega = np.abs(np.asarray(omega, dtype=float))
    if spec.kind == "flat":
        return np.full_like(omega, spec.s0)
    if spec.kind == "lorentzian":
        half = 0.5 * spec.kappa
        return spec.s0 * half ** 2 / ((omega - spec.omega0) ** 2 + half ** 2)
    omega_tab, s_tab = spec.table
    return np.interp(omega, omega_tab, s_tab, left=0.0, right=0.0)


def synthesize_gaussian(
    spec: SpectrumSpec,
    n_samples: int,
    t_total: float,
    n_sites: int = 1,
    seed=None,
) -> NoiseTrajectory:
    """Stationary Gaussian noise with target spectrum ``spec``.

    Frequency-domain synthesis: on the DFT grid omega_m = 2 pi m / t_total the
    coefficients are independent circular Gaussians with E|X_m|^2 = n S_m / dt
    (DC and Nyquist bins real), inverse-transformed to n_samples real values.
    The ensemble periodogram of the result reproduces S exactly on this grid,
    which is what :func:`estimate_spectrum` computes.
    """
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}")
    if not t_total > 0:
        raise ValueError(f"t_total must be positive, got {t_total}")
    if n_sites < 1:
        raise ValueError(f"n_sites must be >= 1, got {n_sites}")
    dt = t_total / n_samples
    omega = 2.0 * np.pi * np.fft.rfftfreq(n_samples, d=dt)
    target = spectrum_value(spec, omega)
    amp = np.sqrt(n_samples * target / dt)
    n_bins = omega.shape[0]
    values = np.empty((n_sites, n_samples))
    for i in range(n_sites):
        rng = np.random.default_rng(derive_seed(seed, 0, i))
        re = rng.standard_normal(n_bins)
        im = rng.standard_normal(n_bins)
        coeff = amp * (re + 1j * im) / np.sqrt(2.0)
        coeff[0] = amp[0] * re[0]
        if n_samples % 2 == 0:
            coeff[-1] = amp[-1] * re[-1]
        values[i] = np.fft.irfft(coeff, n=n_samples)
    return NoiseTrajectory(dt=dt, values=values, seed=seed)


@dataclass(frozen=True)
class GaussianNoiseSpec:
    """A target spectrum together with its sampling resolution, ready to be
    realized as piecewise-constant noise over a transport window."""

    spectrum: SpectrumSpec
    n_samples: int = 600
    seed: object = None

    def __post_init__(self) -> None:
        if self.n_samples < 2:
            raise ValueError(f"n_samples must be >= 2, got {self.n_samples}")


def realize_noise(spec, n_sites: int, t_total: float) -> NoiseTrajectory:
    """One noise realization for any spec kind; ``None`` means no noise."""
    if spec is None:
        return NoiseTrajectory.zero(n_sites, t_total)
    if isinstance(spec, TelegraphSpec):
        if spec.w_max == 0.0:
            return NoiseTrajectory.zero(n_sites, t_total)
        return generate_telegraph(spec, n_sites, t_total)
    if isinstance(spec, GaussianNoiseSpec):
        return synthesize_gaussian(spec.spectrum, spec.n_samples, t_total,
                                   n_sites=n_sites, seed=spec.seed)
    raise TypeError(f"unsupported noise spec {type(spec).__name__}")


@dataclass(frozen=True)
class EstimatedSpectrum:
    """Ensemble-averaged periodogram on the grid omega_m = 2 pi m / t_total."""

    omega: np.ndarray
    s: np.ndarray
    n_accumulated: int

    def as_spec(self) -> SpectrumSpec:
        return SpectrumSpec(kind="tabulated", table=(self.omega.copy(), self.s.copy()))


def estimate_spectrum(
    trajectories: NoiseTrajectory | Iterable[NoiseTrajectory],
) -> EstimatedSpectrum:
    """Average the discrete periodogram |dt * DFT(W)|^2 / t_total over every
    site row of the given trajectories.

    All trajectories must share their time grid.  For a well-sampled process
    the result converges to S(omega) of W on the DFT grid.
    """
    if isinstance(trajectories, NoiseTrajectory):
        trajectories = [trajectories]
    trajectories = list(trajectories)
    if not trajectories:
        raise ValueError("need at least one trajectory")
    dt = trajectories[0].dt
    n = trajectories[0].n_steps
    for traj in trajectories:
        if traj.n_steps != n or abs(traj.dt - dt) > 1e-15 * dt:
            raise ValueError("trajectories must share one time grid")
    t_total = n * dt
    acc = None
    count = 0
    for traj in trajectories:
        f = dt * np.fft.rfft(traj.values, axis=1)
        p = (f.real ** 2 + f.imag ** 2) / t_total
        acc = p.sum(axis=0) if acc is None else acc + p.sum(axis=0)
        count += traj.n_sites
    omega = 2.0 * np.pi * np.fft.rfftfreq(n, d=dt)
    return EstimatedSpectrum(omega=omega, s=acc / count, n_accumulated=count)


@dataclass(frozen=True)
class EnergyCost:
    """Control-cost integrals over all sites up to t_max.

    ``abs_integral``    : Sum_i Int |W_i| dt, in rad
    ``square_integral`` : Sum_i Int W_i^2 dt, in rad^2/s
    Normalized variants (by j_max*t_max and j_max^2*t_max) are filled in when
    a reference rate was supplied.
    """

    abs_integral: float
    square_integral: float
    t_max: float
    abs_normalized: float | None = None
    square_normalized: float | None = None


def energy_cost(traj: NoiseTrajectory, j_max: float | None = None,
                t_max: float | None = None) -> EnergyCost:
    """Exact piecewise-constant integrals of |W| and W^2 up to ``t_max``.

    ``t_max`` defaults to the trajectory extent; a partial final segment is
    weighted by its actual duration.
    """
    if t_max is None:
        t_max = traj.t_total
    if not 0 < t_max <= traj.t_total * (1 + 1e-12):
        raise ValueError(
            f"t_max must lie in (0, {traj.t_total}], got {t_max}")
    n_full = min(int(t_max / traj.dt), traj.n_steps)
    weights = np.full(traj.n_steps, traj.dt)
    weights[n_full:] = 0.0
    if n_full < traj.n_steps:
        weights[n_full] = t_max - n_full * traj.dt
    abs_integral = float((np.abs(traj.values) * weights).sum())
    square_integral = float((traj.values ** 2 * weights).sum())
    abs_norm = square_norm = None
    if j_max is not None:
        if not j_max > 0:
            raise ValueError(f"j_max must be positive, got {j_max}")
        abs_norm = abs_integral / (j_max * t_max)
        square_norm = square_integral / (j_max ** 2 * t_max)
    return EnergyCost(abs_integral=abs_integral, square_integral=square_integral,
                      t_max=float(t_max), abs_normalized=abs_norm,
                      square_normalized=square_norm)
