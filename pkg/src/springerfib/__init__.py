"""Exact computations on two-row Springer fibers of types A and D."""

__version__ = "0.1.0"
