"""Numerical checks for plurisubharmonic defining functions of domains in C^2."""

from .expr import Point, parse

__version__ = "0.1.0"
__all__ = ["Point", "parse", "__version__"]
