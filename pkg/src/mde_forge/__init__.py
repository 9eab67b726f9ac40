"""Explicit solutions of y'' + pi^2 r^2 E4 y = 0 for r = m/6."""

__version__ = "0.1.0"
