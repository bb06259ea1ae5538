"""Generalised regular variation of arbitrary order: index-matrix calculus,
rate-vector transforms and a catalog of special functions with a numerical
verification harness."""

__version__ = "0.1.0"
