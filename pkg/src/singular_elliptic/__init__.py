"""Semilinear elliptic equations with similarity-invariant absorption."""

__version__ = "0.1.0"
