"""Twisted paper cylinders: thickened folding patterns, smooth isometric embeddings and certificates."""

__version__ = "0.1.0"
