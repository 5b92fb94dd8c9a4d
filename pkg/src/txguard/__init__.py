"""Arithmetic and access-control safety verifier for a core contract language."""

__version__ = "0.1.0"
