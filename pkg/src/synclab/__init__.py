"""Numerical laboratory for synchronized quantum clocks."""

__version__ = "0.1.0"
