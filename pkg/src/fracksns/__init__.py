"""Numerical laboratory for a time-space fractional chemotaxis-fluid system on the torus."""

__version__ = "0.1.0"
