"""Gauge-fixed inhomogeneous linear elastodynamics on 1D/2D grids."""

__version__ = "0.1.0"
