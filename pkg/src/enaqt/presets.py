"""Canned configurations for the four standard studies.

fig1  efficiency vs dephasing sweep at two disorder strengths
fig2  target-site time traces across the dephasing crossover, with the
      incoherent rate-equation overlay
fig3  site-resolved spreading: clean ballistic, intermediate, and strong
      dephasing, with width power-law fits
fig4  one frozen disorder draw probed by six noise spectra, several targets
"""

from __future__ import annotations

import math

import numpy as np

from .config import ExperimentConfig, parse_config

__all__ = ["preset", "PRESET_NAMES"]

PRESET_NAMES = ("fig1", "fig2", "fig3", "fig4")

_J_MAX = 2.0 * math.pi * 31.0
_NETWORK = {
    "n_sites": 10,
    "j_max_hz": 31.0,
    "alpha": 1.22,
    "source_site": 3,
    "target_sites": [8],
    "t_max_s": 0.06,
}
#: flip interval of the dephasing coin, seconds
_DT_FLIP = 1e-4


def _fig1() -> dict:
    gammas = [0.0] + [float(g) for g in
                      np.logspace(math.log10(0.03), 2.0, 12)]
    return {
        "label": "fig1",
        "network": dict(_NETWORK),
        "disorder": {"b_max_over_jmax": [0.5, 2.5], "policy": "resample"},
        "noise": [{"kind": "telegraph", "gamma_over_jmax": gammas,
                   "dt_flip_s": _DT_FLIP}],
        "run": {"n_realizations": 300, "master_seed": 11001, "n_points": 61},
        "analysis": {"spectra": False},
    }


def _fig2() -> dict:
    return {
        "label": "fig2",
        "network": dict(_NETWORK),
        "disorder": {"b_max_over_jmax": [2.5], "policy": "resample"},
        "noise": [{"kind": "telegraph",
                   "gamma_over_jmax": [0.0, 0.23, 1.0, 3.9],
                   "dt_flip_s": _DT_FLIP}],
        "run": {"n_realizations": 300, "master_seed": 11002, "n_points": 61},
        "analysis": {"spectra": False, "rate_overlay": True},
    }


def _fig3() -> dict:
    return {
        "label": "fig3",
        "network": dict(_NETWORK),
        "disorder": {"b_max_over_jmax": [2.5], "policy": "resample"},
        "noise": [
            {"kind": "none", "label": "clean", "b_max_over_jmax": 0.0,
             "n_realizations": 1},
            {"kind": "telegraph", "label": "g1", "gamma_over_jmax": 1.0,
             "dt_flip_s": _DT_FLIP},
            {"kind": "telegraph", "label": "g18.4", "gamma_over_jmax": 18.4,
             "dt_flip_s": _DT_FLIP},
        ],
        "run": {"n_realizations": 300, "master_seed": 11003, "n_points": 601},
        "analysis": {"spectra": False, "width_fit": True},
    }


def _fig4() -> dict:
    base = _J_MAX / 4.0
    return {
        "label": "fig4",
        "network": {**_NETWORK, "target_sites": [8, 9, 10]},
        "disorder": {"b_max_over_jmax": [2.5], "policy": "fixed",
                     "seed": 2061},
        "noise": [
            {"kind": "telegraph", "label": "white", "gamma_over_jmax": 1.0,
             "dt_flip_s": _DT_FLIP},
            {"kind": "gaussian", "label": "broad20",
             "spectrum": {"kind": "lorentzian", "s0_rad2_s": base,
                          "omega0_over_jmax": 0.0, "kappa_over_jmax": 20.0}},
            {"kind": "gaussian", "label": "broad60",
             "spectrum": {"kind": "lorentzian", "s0_rad2_s": base,
                          "omega0_over_jmax": 0.0, "kappa_over_jmax": 60.0}},
            {"kind": "gaussian", "label": "flat",
             "spectrum": {"kind": "flat", "s0_rad2_s": base}},
            {"kind": "gaussian", "label": "narrow5",
             "spectrum": {"kind": "lorentzian", "s0_rad2_s": 4.0 * base,
                          "omega0_over_jmax": 5.0, "kappa_over_jmax": 1.0}},
            {"kind": "gaussian", "label": "narrow50",
             "spectrum": {"kind": "lorentzian", "s0_rad2_s": 4.0 * base,
                          "omega0_over_jmax": 50.0, "kappa_over_jmax": 1.0}},
        ],
        "run": {"n_realizations": 30, "master_seed": 11004, "n_points": 61},
    }


_BUILDERS = {"fig1": _fig1, "fig2": _fig2, "fig3": _fig3, "fig4": _fig4}


def preset(name: str) -> ExperimentConfig:
    """Full configuration of one of the standard studies."""
    if name not in _BUILDERS:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    return parse_config(_BUILDERS[name]())
