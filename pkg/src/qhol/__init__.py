"""Exact computation with q-holonomic sequences."""

__version__ = "0.1.0"
