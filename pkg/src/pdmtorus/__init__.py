"""Torus geodesics, position-dependent-mass oscillators linked to them by
nonlocal point transformations, and the quantum versions of both."""

__version__ = "0.1.0"
