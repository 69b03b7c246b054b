"""Exact Koszul flattening ranks for Coppersmith-Winograd tensors and their Kronecker powers."""

__version__ = "0.1.0"
