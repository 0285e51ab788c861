"""Finite-level Bost-Connes systems for Q and quadratic fields."""

__version__ = "0.1.0"
