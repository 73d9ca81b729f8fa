"""Reduced forms of block-triangular linear differential systems over Q(x)."""

__version__ = "0.1.0"
