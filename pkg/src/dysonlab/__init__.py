"""Desk-scale numerical laboratory for GUE bulk scaling and Dyson-type diffusions."""

__version__ = "0.1.0"
