"""Unique-neighbor expanders from routed products, with exhaustive certification."""

__version__ = "0.1.0"
