"""Theta-stratifications and index formulas for gauged maps into linear representations."""

__version__ = "0.1.0"

__all__ = ["__version__"]
