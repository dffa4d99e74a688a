"""Simulation and certification toolkit for photonic qudit entanglement."""

__version__ = "0.1.0"
