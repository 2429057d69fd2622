"""Batch execution: run every sweep point of a configuration, derive the
analysis products, and write delimited outputs plus a JSON manifest whose
checksums cover every other output file.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import os
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .analysis import (
    boundary_time,
    efficiency_bootstrap,
    fit_power_law_bootstrap,
    fit_window,
    width_bootstrap,
)
from .config import ExperimentConfig, SweepPoint
from .dynamics import classical_rates, rate_equation_evolve
from .ensemble import FixedDisorder, ResampledDisorder, run_ensemble
from .model import (
    assemble_hamiltonian,
    build_coupling_matrix,
    difference_frequencies,
    eigensystem,
    sample_disorder,
)
from .noise import derive_seed, spectrum_value

__all__ = ["RunResult", "run_config", "resolve_output_dir"]

OUTPUT_DIR_ENV = "ENAQT_OUTPUT_DIR"

# sub-seed streams below each point's master seed (single-element paths;
# the ensemble itself uses two-element (r, stream) paths, so no collisions)
_STREAM_ETA_BOOT = 0
_STREAM_WIDTH_BOOT = 1
_STREAM_FIT_BOOT = 2


@dataclass(frozen=True)
class RunResult:
    out_dir: Path
    manifest: dict
    files: tuple[str, ...]


def resolve_output_dir(config: ExperimentConfig, override=None) -> Path:
    """Output directory precedence: explicit override, then the config, then
    the environment, then the working directory; the run label is appended."""
    base = override or config.out_dir or os.environ.get(OUTPUT_DIR_ENV) or "."
    return Path(base) / config.label


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _gamma_rad_s(point: SweepPoint, config: ExperimentConfig) -> float | None:
    """Dephasing rate of the point in rad/s; for gaussian models the
    zero-frequency white-noise equivalent 4*S(0); None only for tabulated
    spectra without a zero-frequency value is impossible (S extends to 0)."""
    model = point.model
    if model.kind in ("none", "telegraph"):
        return model.gamma_over_jmax * config.j_max
    spec = model.spectrum_spec(config.j_max)
    return 4.0 * float(spectrum_value(spec, 0.0))


def _telegraph_spectrum(gamma: float, dt_flip: float, omega: np.ndarray) -> np.ndarray:
    # piecewise-constant iid levels: S(w) = (gamma/4) * sinc^2(w dt/2)
    return 0.25 * gamma * np.sinc(omega * dt_flip / (2.0 * np.pi)) ** 2


def _spectrum_rows(point: SweepPoint, config: ExperimentConfig):
    model = point.model
    t_max = config.t_max
    if model.kind == "telegraph":
        n_steps = int(np.ceil(t_max / model.dt_flip_s - 1e-12))
        omega = 2.0 * np.pi * np.fft.rfftfreq(n_steps, d=model.dt_flip_s)
        gamma = model.gamma_over_jmax * config.j_max
        s = _telegraph_spectrum(gamma, model.dt_flip_s, omega)
    else:
        dt = t_max / model.n_samples
        omega = 2.0 * np.pi * np.fft.rfftfreq(model.n_samples, d=dt)
        s = spectrum_value(model.spectrum_spec(config.j_max), omega)
    return [[_fmt(w), _fmt(v)] for w, v in zip(omega, s)]


def _rate_overlay(point: SweepPoint, config: ExperimentConfig, coupling,
                  fixed_profiles, point_seed, times: np.ndarray) -> np.ndarray:
    """Mean rate-equation populations over the same disorder draws as the
    ensemble (identical seed paths)."""
    gamma = point.model.gamma_over_jmax * config.j_max
    p0 = np.zeros(config.n_sites)
    p0[config.source_site - 1] = 1.0
    if config.disorder_policy == "fixed":
        draws = [fixed_profiles[point.b_max_over_jmax]]
    else:
        draws = [sample_disorder(config.n_sites,
                                 point.b_max_over_jmax * config.j_max,
                                 derive_seed(point_seed, r, 0))
                 for r in range(point.n_realizations)]
    acc = np.zeros((config.n_sites, times.shape[0]))
    for profile in draws:
        rates = classical_rates(coupling, profile, gamma)
        acc += rate_equation_evolve(rates, p0, times).populations
    return acc / len(draws)


def run_config(
    config: ExperimentConfig,
    out_dir=None,
    seed: int | None = None,
    workers: int | None = None,
) -> RunResult:
    """Execute the sweep and write the output bundle.

    ``seed`` and ``workers`` override the config's values (handy for rerun
    checks); the directory override follows :func:`resolve_output_dir`.
    """
    if seed is not None:
        config = dataclasses.replace(config, master_seed=seed)
    if workers is not None:
        config = dataclasses.replace(config, workers=workers)
    target = resolve_output_dir(config, out_dir)
    target.mkdir(parents=True, exist_ok=True)

    t_start = time.perf_counter()
    network = config.network_spec()
    coupling = build_coupling_matrix(config.n_sites, config.j_max, config.alpha)
    times = config.output_times()

    fixed_profiles = {}
    if config.disorder_policy == "fixed":
        for b in {p.b_max_over_jmax for p in config.points()}:
            fixed_profiles[b] = sample_disorder(
                config.n_sites, b * config.j_max, config.disorder_seed)

    files: list[str] = []
    point_entries: list[dict] = []
    efficiency_rows: list[list[str]] = []

    for point in config.points():
        model = point.model
        b_rad = point.b_max_over_jmax * config.j_max
        if config.disorder_policy == "fixed":
            policy = FixedDisorder(fixed_profiles[point.b_max_over_jmax])
        else:
            policy = ResampledDisorder(b_rad)
        point_seed = derive_seed(config.master_seed, point.index)
        ensemble = run_ensemble(network, policy, model.noise_spec(config.j_max),
                                point.n_realizations, point_seed, times,
                                workers=config.workers)

        pop_name = f"populations_{point.label}.csv"
        rows = [[_fmt(t), str(site + 1), _fmt(ensemble.p_mean[site, k]),
                 _fmt(ensemble.p_stderr[site, k])]
                for k, t in enumerate(times)
                for site in range(config.n_sites)]
        _write_csv(target / pop_name, ["time_s", "site", "p_mean", "p_stderr"],
                   rows)
        files.append(pop_name)
        entry: dict = {
            "label": point.label,
            "noise_kind": model.kind,
            "noise_label": model.label,
            "b_max_over_jmax": point.b_max_over_jmax,
            "gamma_over_jmax": model.gamma_over_jmax,
            "n_realizations": point.n_realizations,
            "seed_path": [point.index],
            "files": {"populations": pop_name},
        }

        summary = efficiency_bootstrap(
            ensemble, n_boot=config.efficiency_n_boot,
            seed=derive_seed(point_seed, _STREAM_ETA_BOOT))
        gamma_col = (model.gamma_over_jmax if model.kind != "gaussian"
                     else float("nan"))
        for site in range(config.n_sites):
            efficiency_rows.append([
                _fmt(gamma_col), _fmt(point.b_max_over_jmax), str(site + 1),
                _fmt(summary.eta_norm[site]), _fmt(summary.ci_lo[site]),
                _fmt(summary.ci_hi[site])])
        entry["eta"] = {
            str(site + 1): {
                "eta_norm": float(summary.eta_norm[site]),
                "ci_lo": float(summary.ci_lo[site]),
                "ci_hi": float(summary.ci_hi[site]),
                "stderr": float(summary.eta_stderr[site]),
            }
            for site in range(config.n_sites)
        }

        if config.width_fit:
            gamma_rad = _gamma_rad_s(point, config)
            t_boundary = boundary_time(coupling, b_rad, gamma_rad,
                                       config.source_site, (1, 2))
            width = width_bootstrap(ensemble, config.source_site,
                                    n_boot=config.width_n_boot,
                                    seed=derive_seed(point_seed,
                                                     _STREAM_WIDTH_BOOT))
            width_name = f"width_{point.label}.csv"
            _write_csv(target / width_name,
                       ["time_s", "sigma_wp", "ci_lo", "ci_hi"],
                       [[_fmt(t), _fmt(width.sigma[k]), _fmt(width.ci_lo[k]),
                         _fmt(width.ci_hi[k])]
                        for k, t in enumerate(times)])
            files.append(width_name)
            entry["files"]["width"] = width_name
            entry["boundary_time_s"] = float(t_boundary)
            try:
                window = fit_window(times, t_boundary)
                fit = fit_power_law_bootstrap(
                    ensemble, config.source_site, window,
                    n_boot=config.width_n_boot,
                    seed=derive_seed(point_seed, _STREAM_FIT_BOOT))
            except ValueError as exc:
                # grid too coarse before the boundary; keep the width series
                entry["width_fit"] = None
                entry["width_fit_skipped"] = str(exc)
            else:
                entry["width_fit"] = {
                    "A": fit.amplitude, "C": fit.exponent,
                    "sigma_A": fit.sigma_amplitude,
                    "sigma_C": fit.sigma_exponent,
                    "window_s": list(fit.window), "n_points": fit.n_points,
                }

        if (config.rate_overlay and model.kind == "telegraph"
                and model.gamma_over_jmax > 0):
            overlay = _rate_overlay(point, config, coupling, fixed_profiles,
                                    point_seed, times)
            rate_name = f"rate_{point.label}.csv"
            _write_csv(target / rate_name, ["time_s", "site", "p_rate"],
                       [[_fmt(t), str(site + 1), _fmt(overlay[site, k])]
                        for k, t in enumerate(times)
                        for site in range(config.n_sites)])
            files.append(rate_name)
            entry["files"]["rate_overlay"] = rate_name

        has_noise = (model.kind == "gaussian"
                     or (model.kind == "telegraph"
                         and model.gamma_over_jmax > 0))
        if config.spectra and has_noise:
            spec_name = f"spectrum_{point.label}.csv"
            _write_csv(target / spec_name, ["omega_rad_s", "s_value"],
                       _spectrum_rows(point, config))
            files.append(spec_name)
            entry["files"]["spectrum"] = spec_name

        point_entries.append(entry)

    eff_name = f"efficiency_{config.label}.csv"
    _write_csv(target / eff_name,
               ["gamma_over_jmax", "b_max_over_jmax", "site", "eta_norm",
                "ci_lo", "ci_hi"], efficiency_rows)
    files.append(eff_name)

    manifest: dict = {
        "package": "enaqt",
        "version": _package_version(),
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "label": config.label,
        "config": config.to_dict(),
        "j_max_rad_s": config.j_max,
        "seeds": {
            "master_seed": config.master_seed,
            "point_paths": {p.label: [p.index] for p in config.points()},
        },
        "files": {"efficiency": eff_name},
        "points": point_entries,
    }
    if config.disorder_policy == "fixed":
        freqs = {}
        for b, profile in sorted(fixed_profiles.items()):
            h = assemble_hamiltonian(coupling, profile)
            freqs[f"b{b:g}"] = [float(w)
                                for w in difference_frequencies(eigensystem(h))]
        manifest["difference_frequencies_rad_s"] = freqs
    manifest["wall_time_s"] = time.perf_counter() - t_start
    manifest["checksums"] = {name: _sha256(target / name) for name in files}

    if "json" in config.formats:
        manifest_path = target / "manifest.json"
        manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
        files.append("manifest.json")

    return RunResult(out_dir=target, manifest=manifest, files=tuple(files))


def _package_version() -> str:
    from . import __version__
    return __version__
