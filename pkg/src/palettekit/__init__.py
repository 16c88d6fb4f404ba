"""Palette-based image decomposition, recoloring, harmonization, and transfer."""

__version__ = "0.1.0"
