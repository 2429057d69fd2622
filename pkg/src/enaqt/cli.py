"""Command-line front-end.

Subcommands
-----------
run       execute a configuration file
preset    run one of the built-in studies (or print its config with --dump)
spectrum  validate synthesized noise against its target spectrum

The exit code is 0 only when every requested check passes.  The default
output directory can be set through the ENAQT_OUTPUT_DIR environment
variable; flags override it.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import ConfigError, ExperimentConfig, parse_config
from .noise import derive_seed, estimate_spectrum, realize_noise, spectrum_value
from .presets import PRESET_NAMES, preset
from .runner import run_config

__all__ = ["main"]

_VALIDATE_TOL = 0.10
# seed path for validation trajectories, far above any sweep point index
_VALIDATE_STREAM = 10 ** 6


def _shared_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config's master seed")
    parser.add_argument("--workers", type=int, default=None,
                        help="override the config's worker count")
    parser.add_argument("--out", default=None,
                        help="output directory (default: config, then "
                             "ENAQT_OUTPUT_DIR, then '.')")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="enaqt",
        description="Dephasing-assisted transport simulations on disordered "
                    "long-range spin networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a configuration file")
    run_p.add_argument("--config", required=True, help="path to a JSON config")
    _shared_run_flags(run_p)

    pre_p = sub.add_parser("preset",
                           help="run a built-in study, or print its config")
    pre_p.add_argument("--name", required=True, choices=PRESET_NAMES)
    pre_p.add_argument("--dump", action="store_true",
                       help="print the config as JSON and exit")
    _shared_run_flags(pre_p)

    spec_p = sub.add_parser(
        "spectrum",
        help="compare synthesized noise with its target spectral density")
    spec_p.add_argument("--validate", action="store_true", required=True,
                        help="run the comparison (required)")
    spec_p.add_argument("--config", required=True, help="path to a JSON config")
    spec_p.add_argument("--seed", type=int, default=None,
                        help="override the config's master seed")
    return parser


def _execute(config: ExperimentConfig, args) -> int:
    result = run_config(config, out_dir=args.out, seed=args.seed,
                        workers=args.workers)
    for name in result.files:
        print(f"wrote {result.out_dir / name}")
    print(f"run '{result.manifest['label']}': {len(result.manifest['points'])} "
          f"sweep points, {len(result.files)} files, "
          f"{result.manifest['wall_time_s']:.1f} s")
    return 0


def _checkpoints(model, j_max: float, omega_grid: np.ndarray) -> list[float]:
    """Frequencies at which the estimate is compared, snapped to the
    estimator's DFT grid so the synthesis target is exact there."""
    spec = model.spectrum_spec(j_max)
    omega_max = float(omega_grid[-1])
    if spec.kind == "lorentzian":
        raw = [spec.omega0, abs(spec.omega0 - 0.5 * spec.kappa),
               spec.omega0 + 0.5 * spec.kappa]
    elif spec.kind == "flat":
        raw = [0.25 * omega_max, 0.5 * omega_max, 0.75 * omega_max]
    else:
        raw = [w for w in spec.table[0] if 0.0 < w < omega_max][:5]
        if not raw:
            raw = [0.5 * omega_max]
    snapped = []
    for w in raw:
        idx = int(np.argmin(np.abs(omega_grid - min(w, omega_max))))
        snapped.append(float(omega_grid[idx]))
    return sorted(set(snapped))


def _validate_spectra(config: ExperimentConfig, seed_override) -> int:
    gaussian = [m for m in config.noise_models if m.kind == "gaussian"]
    if not gaussian:
        print("spectrum: config has no gaussian noise models to validate",
              file=sys.stderr)
        return 2
    master = config.master_seed if seed_override is None else seed_override
    failures = 0
    for m_idx, model in enumerate(gaussian):
        spec = model.noise_spec(config.j_max)
        trajectories = []
        for r in range(config.n_realizations):
            seeded = type(spec)(spectrum=spec.spectrum,
                                n_samples=spec.n_samples,
                                seed=derive_seed(master, _VALIDATE_STREAM,
                                                 m_idx, r))
            trajectories.append(realize_noise(seeded, config.n_sites,
                                              config.t_max))
        est = estimate_spectrum(trajectories)
        target_spec = model.spectrum_spec(config.j_max)
        for omega in _checkpoints(model, config.j_max, est.omega):
            target = float(spectrum_value(target_spec, omega))
            idx = int(np.argmin(np.abs(est.omega - omega)))
            got = float(est.s[idx])
            if target == 0.0:
                ok = got == 0.0
                rel = float("inf") if not ok else 0.0
            else:
                rel = abs(got - target) / target
                ok = rel <= _VALIDATE_TOL
            status = "PASS" if ok else "FAIL"
            failures += 0 if ok else 1
            print(f"{status} {model.label}: S({omega:.6g} rad/s) "
                  f"target={target:.6g} estimate={got:.6g} "
                  f"rel={rel:.3f} tol={_VALIDATE_TOL}")
    n_checked = len(gaussian)
    if failures:
        print(f"spectrum validation: {failures} checkpoint(s) failed "
              f"across {n_checked} model(s)")
        return 1
    print(f"spectrum validation: all checkpoints within "
          f"{_VALIDATE_TOL:.0%} for {n_checked} model(s)")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _execute(parse_config(args.config), args)
        if args.command == "preset":
            config = preset(args.name)
            if args.dump:
                print(config.to_json())
                return 0
            return _execute(config, args)
        return _validate_spectra(parse_config(args.config), args.seed)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
