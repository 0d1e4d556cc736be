"""Dual-affine moment invariants for M-dimensional objects with N channels."""

__version__ = "0.1.0"
