"""Vacuum entanglement of a 1+1 scalar field from truncated discretizer modes."""

__version__ = "0.1.0"
