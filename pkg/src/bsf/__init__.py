"""Balanced spanning forests: heuristics, exact MIP models and branch-and-price."""

__version__ = "0.1.0"
