"""Relativistic Neumann-Wigner potentials: construction and numerical verification."""

__version__ = "0.1.0"
