"""Longitudinal flight envelope protection workbench."""

__version__ = "0.1.0"
