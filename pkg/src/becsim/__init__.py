"""Simulation toolkit for a lossy two-mode condensate: mean-field Bloch
dynamics, quasi-steady decay modes, driven linear response, and exact
open-system evolution with quantum trajectories."""

from .errors import (
    BecsimError,
    ConfigError,
    ConvergenceError,
    IntegrationError,
    NoPhysicalModeError,
    NoResonanceError,
    ResonanceSingularityError,
    UndefinedObservableError,
)
from .meanfield import (
    BlochState,
    DriveSpec,
    FixedPoint,
    ObservableSeries,
    bifurcation_un_threshold,
    bloch_rhs,
    contrast,
    find_fixed_points,
    integrate,
    purity_mf,
)
from .model import (
    DerivedRates,
    FockSector,
    ModelParams,
    angular_momentum_ops,
    build_hamiltonian,
    coherent_state,
    config_hash,
    derive_rates,
    loss_rates_for,
    lowering_ops,
    params_from_dict,
)
from .quantum import (
    CovarianceSet,
    EnsembleSeries,
    HusimiGrid,
    MasterSeries,
    MeasurementDistributions,
    QuantumState,
    bloch_expectations,
    coherent_condensate,
    contrast_q,
    covariances,
    dicke_state,
    husimi_q,
    mcwf_ensemble,
    measurement_distributions,
    propagate_master,
    purity_q,
    reduced_spdm,
)
from .response import (
    ResponseSolution,
    ResponseSurface,
    linear_response,
    measured_response,
    resonance_frequency,
    response_bias,
    response_surface,
    response_tunneling,
)
from .steadystate import (
    AdiabaticSeries,
    DecayModeSolution,
    adiabatic_decay,
    alpha_closed_form,
    alpha_limits,
    build_decay_matrix,
    critical_n,
    linear_decay_modes,
    nonlinear_quasi_steady,
    select_physical,
    sr_condition_J,
    sr_condition_t1inv,
)

__version__ = "0.1.0"

__all__ = [
    "AdiabaticSeries",
    "BecsimError",
    "BlochState",
    "ConfigError",
    "ConvergenceError",
    "CovarianceSet",
    "DecayModeSolution",
    "DerivedRates",
    "DriveSpec",
    "EnsembleSeries",
    "FixedPoint",
    "FockSector",
    "HusimiGrid",
    "IntegrationError",
    "MasterSeries",
    "MeasurementDistributions",
    "ModelParams",
    "NoPhysicalModeError",
    "NoResonanceError",
    "ObservableSeries",
    "QuantumState",
    "ResonanceSingularityError",
    "ResponseSolution",
    "ResponseSurface",
    "UndefinedObservableError",
    "adiabatic_decay",
    "alpha_closed_form",
    "alpha_limits",
    "angular_momentum_ops",
    "bifurcation_un_threshold",
    "bloch_expectations",
    "bloch_rhs",
    "build_decay_matrix",
    "build_hamiltonian",
    "coherent_condensate",
    "coherent_state",
    "config_hash",
    "contrast",
    "contrast_q",
    "covariances",
    "critical_n",
    "derive_rates",
    "dicke_state",
    "find_fixed_points",
    "husimi_q",
    "integrate",
    "linear_decay_modes",
    "linear_response",
    "loss_rates_for",
    "lowering_ops",
    "mcwf_ensemble",
    "measured_response",
    "measurement_distributions",
    "nonlinear_quasi_steady",
    "params_from_dict",
    "propagate_master",
    "purity_mf",
    "purity_q",
    "reduced_spdm",
    "resonance_frequency",
    "response_bias",
    "response_surface",
    "response_tunneling",
    "select_physical",
    "sr_condition_J",
    "sr_condition_t1inv",
    "__version__",
]
