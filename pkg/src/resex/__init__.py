"""Simulation and analysis of spin-qubit chains with residual exchange coupling."""

__version__ = "0.1.0"
