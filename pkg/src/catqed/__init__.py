"""Dispersive circuit-QED toolbox: cat states, parity measurement, Wigner
tomography, photon loss and cat-code error correction on a truncated Fock space."""

from ._backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
