"""Exact conserved-quantity machinery and spectral simulation for the
dispersive Degasperis-Procesi equation on the circle."""

__version__ = "0.1.0"
