"""Numerical laboratory for kinetic transport Strichartz estimates."""

__version__ = "0.1.0"
