"""Exact verification of a multidimensional q-series summation theorem, a
conjectured transformation generalizing it, and every step of its proof."""

__version__ = "0.1.0"
