"""Numerical laboratory for weighted isoperimetric problems on the half-space."""

__version__ = "0.1.0"
