"""Accelerated multiplicative weights on products of simplices."""

__version__ = "0.1.0"
