"""Environment-assisted quantum transport on disordered long-range chains.

The package simulates a single excitation hopping across a power-law coupled
spin network subject to static disorder and engineered dephasing noise, and
provides the analysis used to locate the crossover from Anderson-type
localization through noise-assisted transport to Zeno suppression.
"""

from .model import (
    NetworkSpec,
    CouplingMatrix,
    DisorderProfile,
    HamiltonianMatrix,
    EigenSystem,
    build_coupling_matrix,
    sample_disorder,
    assemble_hamiltonian,
    eigensystem,
    difference_frequencies,
)
from .noise import (
    TelegraphSpec,
    SpectrumSpec,
    GaussianNoiseSpec,
    NoiseTrajectory,
    EnergyCost,
    EstimatedSpectrum,
    derive_seed,
    generate_telegraph,
    dephasing_rate,
    spectrum_value,
    synthesize_gaussian,
    estimate_spectrum,
    realize_noise,
    energy_cost,
)
from .dynamics import (
    StateVector,
    DensityMatrix,
    PopulationSeries,
    RateMatrix,
    LindbladResult,
    propagate_trajectory,
    lindblad_evolve,
    classical_rates,
    rate_equation_evolve,
)
from .ensemble import (
    FixedDisorder,
    ResampledDisorder,
    EnsembleResult,
    run_ensemble,
)
from .analysis import (
    EfficiencyReport,
    EfficiencySummary,
    WidthSeries,
    PowerLawFit,
    BootstrapCI,
    transport_efficiency,
    efficiency_bootstrap,
    wavepacket_width,
    width_bootstrap,
    fit_power_law,
    fit_power_law_bootstrap,
    fit_window,
    boundary_time,
    bootstrap_ci,
)
from .config import (
    ConfigError,
    NoiseModel,
    SweepPoint,
    ExperimentConfig,
    parse_config,
)
from .presets import PRESET_NAMES, preset
from .runner import RunResult, run_config, resolve_output_dir

__version__ = "0.1.0"
