"""Subradiance in a chain of two-level atoms with a single excitation."""

from .dickespace import DipoleState, SpectralDensity, amplitude, density, overlap, partial_amplitudes
from .dynamics import DriveConfig, IntegrationConfig, integrate, mean_excitation
from .greenkernel import MAGIC_ANGLE, ChainConfig, coupling_matrix, scalar_kernel, vector_kernel
from .spectrum import (SpectralGrid, gamma_exact, gamma_infinite, gamma_sinc_approx,
                       omega_finite, omega_infinite)

__version__ = "0.1.0"
