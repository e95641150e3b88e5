"""Avoidability of patterns and formulas in combinatorics on words."""

__version__ = "0.1.0"
