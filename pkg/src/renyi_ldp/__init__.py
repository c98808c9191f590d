"""Thermodynamic formalism for the Renyi map at desk scale."""

__version__ = "0.1.0"
