"""Spectral-grid laboratory for position/momentum entangled particle pairs."""

__version__ = "0.1.0"
