"""Simulation of twofold iterated stochastic integrals and Lévy areas."""

__version__ = "0.1.0"
