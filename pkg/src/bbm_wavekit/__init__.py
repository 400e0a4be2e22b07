"""Discrete wave turbulence for the BBM equation on a large torus.

Spectral fields on the torus, Gaussian random data, a pseudo-spectral solver,
the Dyson expansion of the flow, binary-tree diagrams with their exact
time integrals, and the effective phase dynamics of the paired diagrams.
"""
from .spectral_core import TorusSpec, SpectralField, Wavenumber, omega
from .stochastic_data import Profile, inverse_bracket, sample_initial_datum
from .phase_theory import PHASE_SIGN, u_of, f_tilde, phi_closed, phi_continuum

__version__ = "0.1.0"

__all__ = [
    "TorusSpec", "SpectralField", "Wavenumber", "omega",
    "Profile", "inverse_bracket", "sample_initial_datum",
    "PHASE_SIGN", "u_of", "f_tilde", "phi_closed", "phi_continuum",
]
