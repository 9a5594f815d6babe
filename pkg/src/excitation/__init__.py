from .signals import (
    MultiSine,
    WhiteNoiseInput,
    PrbsInput,
    ActuatorFilter,
    multisine_sample,
    normalize_energy,
    actuator_filter,
)
from .spectral_lines import (
    SpectralLineEstimate,
    InformationMatrix,
    estimate_spectral_line,
    transfer_amplitude,
    information_matrix,
    multisine_information_matrix,
    pe_lower_bound,
    empirical_radius,
    select_frequencies,
)
from .gramians import ExcitationReport, finite_excitation_check, gramian, controllability_gramian

__all__ = [
    "MultiSine",
    "WhiteNoiseInput",
    "PrbsInput",
    "ActuatorFilter",
    "multisine_sample",
    "normalize_energy",
    "actuator_filter",
    "SpectralLineEstimate",
    "InformationMatrix",
    "estimate_spectral_line",
    "transfer_amplitude",
    "information_matrix",
    "multisine_information_matrix",
    "pe_lower_bound",
    "empirical_radius",
    "select_frequencies",
    "ExcitationReport",
    "finite_excitation_check",
    "gramian",
    "controllability_gramian",
]
