"""Convex corners of positive operators and the parameters attached to them."""

__version__ = "0.1.0"
