"""Kinetic simulation and linear stability toolkit for chemotactic trail formation."""

__version__ = "0.1.0"

from .params import (
    Coupling,
    ModelParams,
    ReducedParams,
    instability_margin,
    inviscid_threshold_chi,
    is_unstable,
    load_config,
    model_params_from_mapping,
    most_unstable_k,
    parse_config_text,
    reduce_params,
)
from .spectral import Representation, SpatialField2, SpectralField3, SpectralGrid, read_field, write_field
from .dynamics import (
    PhaseState,
    Scheme,
    StepperConfig,
    fokker_planck_step,
    homogeneous_state,
    read_checkpoint,
    run,
    state_from_density,
    write_checkpoint,
)
from .linstab import (
    DispersionResult,
    NoRoot,
    assemble_viscous_operator,
    dispersion_integral,
    find_unstable_root,
    resolvent_norm_check,
    rightmost_eigenvalues,
    seed_profiles,
)
from .diagnostics import ObservableCollector, compute_observables, fit_exponential_rate
from .experiments import (
    ExperimentConfig,
    ExperimentKind,
    build_config,
    dispersion_report,
    run_eigen,
    run_growth_match,
    run_instability_scan,
    run_simulate,
    run_stability_sweep,
)

__all__ = [
    "__version__",
    "Coupling",
    "ModelParams",
    "ReducedParams",
    "instability_margin",
    "inviscid_threshold_chi",
    "is_unstable",
    "load_config",
    "model_params_from_mapping",
    "most_unstable_k",
    "parse_config_text",
    "reduce_params",
    "Representation",
    "SpatialField2",
    "SpectralField3",
    "SpectralGrid",
    "read_field",
    "write_field",
    "PhaseState",
    "Scheme",
    "StepperConfig",
    "fokker_planck_step",
    "homogeneous_state",
    "read_checkpoint",
    "run",
    "state_from_density",
    "write_checkpoint",
    "DispersionResult",
    "NoRoot",
    "assemble_viscous_operator",
    "dispersion_integral",
    "find_unstable_root",
    "resolvent_norm_check",
    "rightmost_eigenvalues",
    "seed_profiles",
    "ObservableCollector",
    "compute_observables",
    "fit_exponential_rate",
    "ExperimentConfig",
    "ExperimentKind",
    "build_config",
    "dispersion_report",
    "run_eigen",
    "run_growth_match",
    "run_instability_scan",
    "run_simulate",
    "run_stability_sweep",
]
