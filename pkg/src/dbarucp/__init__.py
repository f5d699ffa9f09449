"""Numerical toolkit for d-bar unique continuation with square-integrable potentials."""

__version__ = "0.1.0"
