"""Numerics for homogeneous de Branges spaces and their canonical systems."""

__version__ = "0.1.0"
