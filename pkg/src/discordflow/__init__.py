"""Discord and entanglement flow from two qubits through leaky cavities into reservoirs."""
from .correlations import (
    PAIRS,
    CorrelationRecord,
    SubclassError,
    XState,
    classical_correlations,
    concurrence_x,
    discord_x,
    mutual_information,
    two_party_state,
    von_neumann_entropy,
)
from .dynamics import AmplitudeTriple, SystemParams, amplitude_ode_oracle, amplitudes, xi_zeros
from .extraction import OutputRecord, emitted_photons, kappa_from_gamma, output_flux
from .oracle import MeasurementBasis, discord_bruteforce, measured_information

__all__ = [
    "PAIRS", "AmplitudeTriple", "CorrelationRecord", "MeasurementBasis", "OutputRecord",
    "SubclassError", "SystemParams", "XState", "amplitude_ode_oracle", "amplitudes",
    "classical_correlations", "concurrence_x", "discord_bruteforce", "discord_x",
    "emitted_photons", "kappa_from_gamma", "measured_information", "mutual_information",
    "output_flux", "two_party_state", "von_neumann_entropy", "xi_zeros",
]
