"""Exact volumes, Siegel-Veech constants and counting checks for genus-zero flat surfaces."""

__version__ = "0.1.0"
