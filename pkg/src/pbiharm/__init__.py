"""Certified parameter intervals and radial solvers for p-biharmonic Navier problems."""

__version__ = "0.1.0"
