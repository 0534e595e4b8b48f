"""Quantum TSP solvers behind a simulated quantum-cloud service."""

__version__ = "0.1.0"
