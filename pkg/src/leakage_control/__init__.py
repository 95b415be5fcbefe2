"""Leakage of a stored quantum state from a system subspace, and its pulse control."""

__version__ = "0.1.0"

from .baths import (
    BathMode,
    CorrelationKernel,
    DiscreteThermalBath,
    SingleModeFockBath,
    TrivialBath,
    beta_from_temperature,
    discretize_spectrum,
    fock_kernel,
    thermal_kernel,
    thermal_occupation,
    trivial_kernel,
)
from .control import PhaseProfile, PulseTrain, accumulated_phase, control_field, controlled_system_operator
from .engine import (
    InteractionTerm,
    LeakageModel,
    LeakageSeries,
    SimulationGrid,
    compute_C,
    compute_L,
    integrand,
    oscillator_model,
    propagate_subspace,
    spin_rwa_model,
    stationary_rate,
    system_kernel,
)
from .optimize import OptimizationResult, ParameterBox, minimize, objective, sweep
from .scenario import Scenario, parse_scenario

__all__ = [
    "BathMode", "CorrelationKernel", "DiscreteThermalBath", "SingleModeFockBath", "TrivialBath",
    "beta_from_temperature", "discretize_spectrum", "fock_kernel", "thermal_kernel", "thermal_occupation",
    "trivial_kernel",
    "PhaseProfile", "PulseTrain", "accumulated_phase", "control_field", "controlled_system_operator",
    "InteractionTerm", "LeakageModel", "LeakageSeries", "SimulationGrid", "compute_C", "compute_L",
    "integrand", "oscillator_model", "propagate_subspace", "spin_rwa_model", "stationary_rate", "system_kernel",
    "OptimizationResult", "ParameterBox", "minimize", "objective", "sweep",
    "Scenario", "parse_scenario",
]
