"""Simulation and key-rate analysis of qudit QKD schemes built from qubit-like states."""

__version__ = "0.1.0"
