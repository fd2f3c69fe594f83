"""Fractional vertical and horizontal calculus on the Heisenberg group."""

__version__ = "0.1.0"
