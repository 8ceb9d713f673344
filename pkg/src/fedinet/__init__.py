"""Structural analysis of directed weighted instance networks."""

__version__ = "0.1.0"
