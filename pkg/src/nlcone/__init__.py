"""Nonlocal Lawson cones."""
__version__ = "0.1.0"
