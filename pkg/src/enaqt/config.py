"""Experiment configuration: a strict JSON schema for batch runs.

A configuration names a network, a disorder policy, one or more noise models,
run bookkeeping (realizations, seeds, output grid, workers) and output
options.  Every key is checked; unknown keys are errors so typos cannot
silently fall back to defaults.  Quantities tied to the coupling strength are
expressed in units of j_max (``gamma_over_jmax``, ``b_max_over_jmax``), while
absolute times and rates carry their unit in the key name (``t_max_s``,
``j_max_rad_s``).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import NetworkSpec
from .noise import GaussianNoiseSpec, SpectrumSpec, TelegraphSpec

__all__ = [
    "ConfigError",
    "NoiseModel",
    "SweepPoint",
    "ExperimentConfig",
    "parse_config",
]

_NOISE_KINDS = ("none", "telegraph", "gaussian")
_POLICIES = ("resample", "fixed")
_FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """Configuration problem, message prefixed with the offending field."""


def _fail(path: str, message: str) -> None:
    raise ConfigError(f"{path}: {message}")


def _section(raw: dict, path: str, allowed: set[str], required: set[str]) -> None:
    if not isinstance(raw, dict):
        _fail(path, f"must be an object, got {type(raw).__name__}")
    unknown = set(raw) - allowed
    if unknown:
        _fail(f"{path}.{sorted(unknown)[0]}", "unknown key")
    missing = required - set(raw)
    if missing:
        _fail(f"{path}.{sorted(missing)[0]}", "required key missing")


def _number(raw, path: str, lo: float | None = None, strict: bool = False) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        _fail(path, f"must be a number, got {raw!r}")
    v = float(raw)
    if not math.isfinite(v):
        _fail(path, "must be finite")
    if lo is not None and (v <= lo if strict else v < lo):
        _fail(path, f"must be {'>' if strict else '>='} {lo}, got {v}")
    return v


def _integer(raw, path: str, lo: int) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int):
        _fail(path, f"must be an integer, got {raw!r}")
    if raw < lo:
        _fail(path, f"must be >= {lo}, got {raw}")
    return raw


def _exactly_one(raw: dict, path: str, keys: tuple[str, ...]) -> str:
    present = [k for k in keys if k in raw]
    if len(present) != 1:
        _fail(path, f"exactly one of {keys} required, got {present or 'none'}")
    return present[0]


@dataclass(frozen=True)
class NoiseModel:
    """One noise setting of a sweep.

    ``gamma_over_jmax`` is the white-noise dephasing rate for telegraph
    models and None for gaussian ones (their strength lives in the spectrum).
    ``b_max_override`` pins this model to one disorder strength regardless of
    the sweep's disorder list.
    """

    kind: str
    label: str
    gamma_over_jmax: float | None = None
    dt_flip_s: float | None = None
    spectrum_kind: str | None = None
    s0: float | None = None
    omega0_over_jmax: float | None = None
    kappa_over_jmax: float | None = None
    table: tuple[tuple[float, ...], tuple[float, ...]] | None = None
    n_samples: int = 600
    b_max_override: float | None = None
    n_realizations_override: int | None = None

    def spectrum_spec(self, j_max: float) -> SpectrumSpec:
        if self.kind != "gaussian":
            raise ValueError(f"model {self.label!r} has no spectrum")
        if self.spectrum_kind == "tabulated":
            return SpectrumSpec(kind="tabulated",
                                table=(np.array(self.table[0]),
                                       np.array(self.table[1])))
        kwargs = {"s0": self.s0}
        if self.spectrum_kind == "lorentzian":
            kwargs["omega0"] = self.omega0_over_jmax * j_max
            kwargs["kappa"] = self.kappa_over_jmax * j_max
        return SpectrumSpec(kind=self.spectrum_kind, **kwargs)

    def noise_spec(self, j_max: float):
        """Concrete (unseeded) noise spec for this model."""
        if self.kind == "none":
            return None
        if self.kind == "telegraph":
            gamma = self.gamma_over_jmax * j_max
            if gamma == 0.0:
                return None
            return TelegraphSpec.from_rate(gamma, self.dt_flip_s)
        return GaussianNoiseSpec(spectrum=self.spectrum_spec(j_max),
                                 n_samples=self.n_samples)


@dataclass(frozen=True)
class SweepPoint:
    """One (disorder strength, noise model) combination of the sweep."""

    index: int
    label: str
    b_max_over_jmax: float
    model: NoiseModel
    n_realizations: int


@dataclass(frozen=True)
class ExperimentConfig:
    label: str
    n_sites: int
    j_max: float
    alpha: float
    source_site: int
    target_sites: tuple[int, ...]
    t_max: float
    b_values: tuple[float, ...]
    disorder_policy: str
    disorder_seed: int | None
    noise_models: tuple[NoiseModel, ...]
    n_realizations: int
    master_seed: int
    times: tuple[float, ...]
    workers: int
    out_dir: str | None
    formats: tuple[str, ...]
    efficiency_n_boot: int = 1000
    width_fit: bool = False
    width_n_boot: int = 100
    rate_overlay: bool = False
    spectra: bool = True

    def network_spec(self) -> NetworkSpec:
        return NetworkSpec(n_sites=self.n_sites, j_max=self.j_max,
                           alpha=self.alpha, source_site=self.source_site,
                           target_sites=self.target_sites, t_max=self.t_max)

    def output_times(self) -> np.ndarray:
        return np.array(self.times, dtype=float)

    def points(self) -> tuple[SweepPoint, ...]:
        """Expand the sweep: every model crossed with every disorder value
        (or with its single override)."""
        points: list[SweepPoint] = []
        labels: set[str] = set()
        for model in self.noise_models:
            b_list = ((model.b_max_override,)
                      if model.b_max_override is not None else self.b_values)
            for b in b_list:
                label = model.label if len(b_list) == 1 and len(self.b_values) == 1 \
                    and model.b_max_override is None else f"{model.label}_b{b:g}"
                if label in labels:
                    _fail(f"noise[{model.label}]", f"duplicate point label {label!r}")
                labels.add(label)
                points.append(SweepPoint(
                    index=len(points), label=label, b_max_over_jmax=b,
                    model=model,
                    n_realizations=model.n_realizations_override
                    or self.n_realizations))
        return tuple(points)

    def to_dict(self) -> dict:
        """Canonical dict with every default materialized; parsing it back
        yields an equal config."""
        noise = []
        for m in self.noise_models:
            entry: dict = {"kind": m.kind, "label": m.label}
            if m.kind == "telegraph":
                entry["gamma_over_jmax"] = m.gamma_over_jmax
                entry["dt_flip_s"] = m.dt_flip_s
            if m.kind == "gaussian":
                spec: dict = {"kind": m.spectrum_kind}
                if m.spectrum_kind in ("flat", "lorentzian"):
                    spec["s0_rad2_s"] = m.s0
                if m.spectrum_kind == "lorentzian":
                    spec["omega0_over_jmax"] = m.omega0_over_jmax
                    spec["kappa_over_jmax"] = m.kappa_over_jmax
                if m.spectrum_kind == "tabulated":
                    spec["omega_rad_s"] = list(m.table[0])
                    spec["s_rad2_s"] = list(m.table[1])
                entry["spectrum"] = spec
                entry["n_samples"] = m.n_samples
            if m.b_max_override is not None:
                entry["b_max_over_jmax"] = m.b_max_override
            if m.n_realizations_override is not None:
                entry["n_realizations"] = m.n_realizations_override
            noise.append(entry)
        out: dict = {
            "label": self.label,
            "network": {
                "n_sites": self.n_sites,
                "j_max_rad_s": self.j_max,
                "alpha": self.alpha,
                "source_site": self.source_site,
                "target_sites": list(self.target_sites),
                "t_max_s": self.t_max,
            },
            "disorder": {
                "b_max_over_jmax": list(self.b_values),
                "policy": self.disorder_policy,
            },
            "noise": noise,
            "run": {
                "n_realizations": self.n_realizations,
                "master_seed": self.master_seed,
                "times_s": list(self.times),
                "workers": self.workers,
            },
            "outputs": {
                "formats": list(self.formats),
            },
            "analysis": {
                "efficiency_n_boot": self.efficiency_n_boot,
                "width_fit": self.width_fit,
                "width_n_boot": self.width_n_boot,
                "rate_overlay": self.rate_overlay,
                "spectra": self.spectra,
            },
        }
        if self.disorder_seed is not None:
            out["disorder"]["seed"] = self.disorder_seed
        if self.out_dir is not None:
            out["outputs"]["directory"] = self.out_dir
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _parse_spectrum(raw: dict, path: str) -> dict:
    _section(raw, path, {"kind", "s0_rad2_s", "omega0_over_jmax",
                         "kappa_over_jmax", "omega_rad_s", "s_rad2_s"},
             {"kind"})
    kind = raw["kind"]
    out: dict = {"spectrum_kind": kind}
    if kind == "flat":
        _section(raw, path, {"kind", "s0_rad2_s"}, {"kind", "s0_rad2_s"})
        out["s0"] = _number(raw["s0_rad2_s"], f"{path}.s0_rad2_s", lo=0.0)
    elif kind == "lorentzian":
        _section(raw, path,
                 {"kind", "s0_rad2_s", "omega0_over_jmax", "kappa_over_jmax"},
                 {"kind", "s0_rad2_s", "omega0_over_jmax", "kappa_over_jmax"})
        out["s0"] = _number(raw["s0_rad2_s"], f"{path}.s0_rad2_s", lo=0.0)
        out["omega0_over_jmax"] = _number(raw["omega0_over_jmax"],
                                          f"{path}.omega0_over_jmax", lo=0.0)
        out["kappa_over_jmax"] = _number(raw["kappa_over_jmax"],
                                         f"{path}.kappa_over_jmax", lo=0.0,
                                         strict=True)
    elif kind == "tabulated":
        _section(raw, path, {"kind", "omega_rad_s", "s_rad2_s"},
                 {"kind", "omega_rad_s", "s_rad2_s"})
        om = [_number(v, f"{path}.omega_rad_s[{i}]", lo=0.0)
              for i, v in enumerate(raw["omega_rad_s"])]
        sv = [_number(v, f"{path}.s_rad2_s[{i}]", lo=0.0)
              for i, v in enumerate(raw["s_rad2_s"])]
        if len(om) != len(sv) or len(om) < 2:
            _fail(path, "tabulated spectrum needs matching arrays of >= 2 points")
        if any(b <= a for a, b in zip(om, om[1:])):
            _fail(f"{path}.omega_rad_s", "must be strictly increasing")
        out["table"] = (tuple(om), tuple(sv))
    else:
        _fail(f"{path}.kind", f"must be one of ('flat', 'lorentzian', "
              f"'tabulated'), got {kind!r}")
    return out


def _parse_noise_model(raw: dict, path: str, j_max: float,
                       used: set[str]) -> list[NoiseModel]:
    _section(raw, path,
             {"kind", "label", "gamma_over_jmax", "dt_flip_s",
              "lambda_over_jmax", "spectrum", "n_samples", "b_max_over_jmax",
              "n_realizations"},
             {"kind"})
    kind = raw.get("kind")
    if kind not in _NOISE_KINDS:
        _fail(f"{path}.kind", f"must be one of {_NOISE_KINDS}, got {kind!r}")
    common: dict = {}
    if "b_max_over_jmax" in raw:
        common["b_max_override"] = _number(raw["b_max_over_jmax"],
                                           f"{path}.b_max_over_jmax", lo=0.0)
    if "n_realizations" in raw:
        common["n_realizations_override"] = _integer(
            raw["n_realizations"], f"{path}.n_realizations", lo=1)

    if kind == "none":
        _section(raw, path, {"kind", "label", "b_max_over_jmax",
                             "n_realizations"}, {"kind"})
        label = raw.get("label", "free")
        return [_labelled(NoiseModel(kind="none", label=label,
                                     gamma_over_jmax=0.0, **common),
                          path, used)]

    if kind == "telegraph":
        _section(raw, path, {"kind", "label", "gamma_over_jmax", "dt_flip_s",
                             "lambda_over_jmax", "b_max_over_jmax",
                             "n_realizations"},
                 {"kind", "gamma_over_jmax"})
        tkey = _exactly_one(raw, path, ("dt_flip_s", "lambda_over_jmax"))
        if tkey == "dt_flip_s":
            dt_flip = _number(raw["dt_flip_s"], f"{path}.dt_flip_s", lo=0.0,
                              strict=True)
        else:
            lam = _number(raw["lambda_over_jmax"], f"{path}.lambda_over_jmax",
                          lo=0.0, strict=True)
            dt_flip = 1.0 / (lam * j_max)
        gammas = raw["gamma_over_jmax"]
        if not isinstance(gammas, list):
            gammas = [gammas]
        if not gammas:
            _fail(f"{path}.gamma_over_jmax", "must not be empty")
        base = raw.get("label")
        models = []
        for i, g in enumerate(gammas):
            gv = _number(g, f"{path}.gamma_over_jmax[{i}]", lo=0.0)
            if len(gammas) == 1:
                label = base if base is not None else f"g{gv:g}"
            else:
                label = f"{base}{gv:g}" if base is not None else f"g{gv:g}"
            models.append(_labelled(
                NoiseModel(kind="telegraph", label=label, gamma_over_jmax=gv,
                           dt_flip_s=dt_flip, **common), path, used))
        return models

    _section(raw, path, {"kind", "label", "spectrum", "n_samples",
                         "b_max_over_jmax", "n_realizations"},
             {"kind", "spectrum"})
    spec = _parse_spectrum(raw["spectrum"], f"{path}.spectrum")
    n_samples = _integer(raw.get("n_samples", 600), f"{path}.n_samples", lo=2)
    label = raw.get("label", spec["spectrum_kind"])
    return [_labelled(NoiseModel(kind="gaussian", label=label,
                                 n_samples=n_samples, **spec, **common),
                      path, used)]


def _labelled(model: NoiseModel, path: str, used: set[str]) -> NoiseModel:
    if model.label in used:
        _fail(path, f"duplicate noise model label {model.label!r}")
    used.add(model.label)
    return model


def parse_config(source) -> ExperimentConfig:
    """Parse a config from a dict, JSON text, or a path to a JSON file."""
    if isinstance(source, Path):
        raw = json.loads(source.read_text())
    elif isinstance(source, str):
        # JSON configs are objects, so text starts with '{'; anything else
        # is taken as a file path
        text = source.lstrip()
        raw = json.loads(text) if text.startswith("{") \
            else json.loads(Path(source).read_text())
    elif isinstance(source, dict):
        raw = source
    else:
        raise ConfigError(f"cannot read config from {type(source).__name__}")

    _section(raw, "config",
             {"label", "network", "disorder", "noise", "run", "outputs",
              "analysis"},
             {"network", "disorder", "noise", "run"})
    label = raw.get("label", "run")
    if not isinstance(label, str) or not label:
        _fail("config.label", "must be a nonempty string")

    net = raw["network"]
    _section(net, "network",
             {"n_sites", "j_max_rad_s", "j_max_hz", "alpha", "source_site",
              "target_sites", "t_max_s", "t_max_over_jmax"},
             {"n_sites", "alpha", "source_site", "target_sites"})
    n_sites = _integer(net["n_sites"], "network.n_sites", lo=2)
    jkey = _exactly_one(net, "network", ("j_max_rad_s", "j_max_hz"))
    j_max = _number(net[jkey], f"network.{jkey}", lo=0.0, strict=True)
    if jkey == "j_max_hz":
        j_max *= 2.0 * np.pi
    alpha = _number(net["alpha"], "network.alpha", lo=0.0, strict=True)
    source_site = _integer(net["source_site"], "network.source_site", lo=1)
    if source_site > n_sites:
        _fail("network.source_site", f"must be <= n_sites = {n_sites}")
    targets_raw = net["target_sites"]
    if not isinstance(targets_raw, list) or not targets_raw:
        _fail("network.target_sites", "must be a nonempty list of sites")
    targets = []
    for i, t in enumerate(targets_raw):
        tv = _integer(t, f"network.target_sites[{i}]", lo=1)
        if tv > n_sites:
            _fail(f"network.target_sites[{i}]", f"must be <= n_sites = {n_sites}")
        targets.append(tv)
    tkey = _exactly_one(net, "network", ("t_max_s", "t_max_over_jmax"))
    t_max = _number(net[tkey], f"network.{tkey}", lo=0.0, strict=True)
    if tkey == "t_max_over_jmax":
        t_max /= j_max

    dis = raw["disorder"]
    _section(dis, "disorder", {"b_max_over_jmax", "policy", "seed"},
             {"b_max_over_jmax", "policy"})
    b_raw = dis["b_max_over_jmax"]
    if not isinstance(b_raw, list):
        b_raw = [b_raw]
    if not b_raw:
        _fail("disorder.b_max_over_jmax", "must not be empty")
    b_values = tuple(_number(b, f"disorder.b_max_over_jmax[{i}]", lo=0.0)
                     for i, b in enumerate(b_raw))
    policy = dis["policy"]
    if policy not in _POLICIES:
        _fail("disorder.policy", f"must be one of {_POLICIES}, got {policy!r}")
    disorder_seed = None
    if policy == "fixed":
        if "seed" not in dis:
            _fail("disorder.seed", "required for the fixed policy")
        disorder_seed = _integer(dis["seed"], "disorder.seed", lo=0)
    elif "seed" in dis:
        _fail("disorder.seed", "only valid for the fixed policy")

    noise_raw = raw["noise"]
    if isinstance(noise_raw, dict):
        noise_raw = [noise_raw]
    if not isinstance(noise_raw, list) or not noise_raw:
        _fail("noise", "must be a model object or nonempty list of them")
    used_labels: set[str] = set()
    models: list[NoiseModel] = []
    for i, entry in enumerate(noise_raw):
        models.extend(_parse_noise_model(entry, f"noise[{i}]", j_max,
                                         used_labels))

    run = raw["run"]
    _section(run, "run",
             {"n_realizations", "master_seed", "n_points", "times_s",
              "workers"},
             {"n_realizations", "master_seed"})
    n_realizations = _integer(run["n_realizations"], "run.n_realizations", lo=1)
    master_seed = _integer(run["master_seed"], "run.master_seed", lo=0)
    gkey = _exactly_one(run, "run", ("n_points", "times_s")) \
        if ("n_points" in run or "times_s" in run) else "n_points"
    if gkey == "n_points":
        n_points = _integer(run.get("n_points", 61), "run.n_points", lo=2)
        times = tuple(np.linspace(0.0, t_max, n_points))
    else:
        ts = run["times_s"]
        if not isinstance(ts, list) or len(ts) < 1:
            _fail("run.times_s", "must be a nonempty list")
        times = tuple(_number(t, f"run.times_s[{i}]", lo=0.0)
                      for i, t in enumerate(ts))
        if any(b < a for a, b in zip(times, times[1:])):
            _fail("run.times_s", "must be nondecreasing")
        if times[-1] > t_max * (1 + 1e-9):
            _fail("run.times_s", f"must not exceed t_max = {t_max}")
    workers = _integer(run.get("workers", os.cpu_count() or 1), "run.workers",
                       lo=1)

    outputs = raw.get("outputs", {})
    _section(outputs, "outputs", {"directory", "formats"}, set())
    out_dir = outputs.get("directory")
    if out_dir is not None and (not isinstance(out_dir, str) or not out_dir):
        _fail("outputs.directory", "must be a nonempty string")
    formats_raw = outputs.get("formats", list(_FORMATS))
    if not isinstance(formats_raw, list) or not formats_raw:
        _fail("outputs.formats", "must be a nonempty list")
    for i, f in enumerate(formats_raw):
        if f not in _FORMATS:
            _fail(f"outputs.formats[{i}]", f"must be one of {_FORMATS}, got {f!r}")
    if "csv" not in formats_raw:
        _fail("outputs.formats", "must include 'csv'")
    formats = tuple(dict.fromkeys(formats_raw))

    analysis = raw.get("analysis", {})
    _section(analysis, "analysis",
             {"efficiency_n_boot", "width_fit", "width_n_boot",
              "rate_overlay", "spectra"}, set())
    eff_boot = _integer(analysis.get("efficiency_n_boot", 1000),
                        "analysis.efficiency_n_boot", lo=1)
    width_fit = analysis.get("width_fit", False)
    rate_overlay = analysis.get("rate_overlay", False)
    spectra = analysis.get("spectra", True)
    for key, val in (("width_fit", width_fit), ("rate_overlay", rate_overlay),
                     ("spectra", spectra)):
        if not isinstance(val, bool):
            _fail(f"analysis.{key}", f"must be true or false, got {val!r}")
    width_boot = _integer(analysis.get("width_n_boot", 100),
                          "analysis.width_n_boot", lo=1)

    config = ExperimentConfig(
        label=label, n_sites=n_sites, j_max=j_max, alpha=alpha,
        source_site=source_site, target_sites=tuple(targets), t_max=t_max,
        b_values=b_values, disorder_policy=policy, disorder_seed=disorder_seed,
        noise_models=tuple(models), n_realizations=n_realizations,
        master_seed=master_seed, times=times, workers=workers,
        out_dir=out_dir, formats=formats, efficiency_n_boot=eff_boot,
        width_fit=width_fit, width_n_boot=width_boot,
        rate_overlay=rate_overlay, spectra=spectra)
    config.network_spec()   # surfaces cross-field validation errors
    config.points()
    return config
