"""Exact differential invariants of symbols, forms and linear differential operators."""
__version__ = "0.1.0"
