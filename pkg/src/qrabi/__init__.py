"""Quantum Rabi model in its parity chains: exact spectra via the G-function
and diagonalization, dynamics, shifted-oscillator analysis and Wigner functions."""
from .chain import Parity, build_chain, converged_spectrum, diagonalize
from .fock import ModelParams, coherent_vector, displacement_matrix, fock_vector
from .gfunction import find_roots, g_value

__all__ = [
    "ModelParams", "Parity", "build_chain", "coherent_vector", "converged_spectrum",
    "diagonalize", "displacement_matrix", "find_roots", "fock_vector", "g_value",
]
